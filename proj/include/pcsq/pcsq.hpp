// Copyright 2026 The pcsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "pcsq/circuit.hpp"
#include "pcsq/config.hpp"
#include "pcsq/dataset.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/evaluator.hpp"
#include "pcsq/inference.hpp"
#include "pcsq/input_families.hpp"
#include "pcsq/learning.hpp"
#include "pcsq/linalg.hpp"
#include "pcsq/model.hpp"
#include "pcsq/model_io.hpp"
#include "pcsq/parameters.hpp"
#include "pcsq/properties.hpp"
#include "pcsq/random.hpp"
#include "pcsq/reductions.hpp"
#include "pcsq/region_graph.hpp"
#include "pcsq/signed_log.hpp"
#include "pcsq/spline.hpp"
#include "pcsq/squaring.hpp"
