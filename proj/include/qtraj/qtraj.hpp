// Copyright 2026 The qtraj Authors
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

#include "qtraj/block_operators.hpp"
#include "qtraj/commands.hpp"
#include "qtraj/config.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/entanglement.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/fock_basis.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/output.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/state.hpp"
#include "qtraj/statistics.hpp"
#include "qtraj/trajectory.hpp"
