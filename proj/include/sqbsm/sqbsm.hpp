// Copyright 2026 The sqbsm Authors
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

#ifndef SQBSM_SQBSM_HPP
#define SQBSM_SQBSM_HPP

#include "sqbsm/fock.hpp"
#include "sqbsm/optics.hpp"
#include "sqbsm/bsm.hpp"
#include "sqbsm/discrimination.hpp"
#include "sqbsm/sweep.hpp"
#include "sqbsm/emit.hpp"
#include "sqbsm/figures.hpp"

#endif  // SQBSM_SQBSM_HPP
