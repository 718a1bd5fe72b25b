// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fairgnn/error.hpp"
#include "fairgnn/tensor.hpp"
#include "fairgnn/graph.hpp"
#include "fairgnn/autodiff.hpp"
#include "fairgnn/gradcheck.hpp"
#include "fairgnn/adam.hpp"
#include "fairgnn/models.hpp"
#include "fairgnn/objectives.hpp"
#include "fairgnn/metrics.hpp"
#include "fairgnn/data_io.hpp"
#include "fairgnn/trainer.hpp"
#include "fairgnn/harness.hpp"
