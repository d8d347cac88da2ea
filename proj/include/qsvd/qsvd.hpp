// Copyright 2026 The qsvd Authors
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

#ifndef QSVD_QSVD_HPP
#define QSVD_QSVD_HPP

#include "qsvd/apps.hpp"
#include "qsvd/bounds.hpp"
#include "qsvd/cost.hpp"
#include "qsvd/errors.hpp"
#include "qsvd/experiments.hpp"
#include "qsvd/io.hpp"
#include "qsvd/matrix_store.hpp"
#include "qsvd/noise.hpp"
#include "qsvd/qsim.hpp"
#include "qsvd/random.hpp"
#include "qsvd/runtime.hpp"
#include "qsvd/svd_oracle.hpp"

#endif  // QSVD_QSVD_HPP
