// Copyright 2026 The MLCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mlci {

/// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model, trajectory, or table has inconsistent sizes.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// A policy or accrual table does not match the MDP horizon.
struct HorizonMismatch : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// Constraint application left no initial state with a usable action.
struct FullyConstrained : Error {
    using Error::Error;
};

/// A state-action pair transitions into empty states with probability one but
/// was not removed from the available set.
struct TotallyBlocked : Error {
    using Error::Error;
};

/// The model admits no trajectory at all (all initial states are empty).
struct NoFeasibleTrajectory : Error {
    using Error::Error;
};

/// A demonstration is infeasible on the MDP it is being evaluated against.
struct InfeasibleDemo : Error {
    InfeasibleDemo(int demo_index, const std::string& what)
        : Error(what), demo_index(demo_index) {}
    int demo_index;
};

/// Gradient ascent on the demonstration likelihood stopped making progress.
struct Divergence : Error {
    using Error::Error;
};

/// No selectable constraint hypothesis remains.
struct NoCandidates : Error {
    using Error::Error;
};

/// An exhaustive search was asked to cover too large a space.
struct TooLarge : Error {
    using Error::Error;
};

/// A file does not conform to its declared schema.
struct SchemaError : Error {
    using Error::Error;
};

struct InvalidConfig : Error {
    using Error::Error;
};

} // namespace mlci
