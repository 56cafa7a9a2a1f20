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

#include <stdexcept>
#include <string>

namespace qtraj {

inline constexpr const char *kVersion = "1.0.0";

/// Invalid run configuration or violated operation precondition.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical check or a trajectory could not be completed.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No-click post-selection requested on a branch of (numerically) zero weight.
struct PostSelectionImpossible : NumericalError {
    using NumericalError::NumericalError;
};

/// The branch selected for collapse has a probability below 1e-300.
struct NumericalUnderflow : NumericalError {
    using NumericalError::NumericalError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Process exit codes used by the command-line runner.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

}  // namespace qtraj
