// Copyright 2026 The cvdistill Authors
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

namespace cvdistill {

/// Configuration value outside its allowed domain (mode index, efficiency,
/// threshold, grid, ...). Maps to CLI exit status 2.
class InvalidConfig : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A covariance matrix or squeezing pair that violates the uncertainty relation.
class PhysicalityError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Cholesky/LDLT factorization failed (input not positive semidefinite).
class FactorizationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Homodyne conditioning on a quadrature with (numerically) zero variance.
class SingularMeasurement : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// No shot passed the trigger condition. Widen Q or raise the shot count.
class EmptyEnsemble : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Too few samples for an estimator; the message names the offending input.
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Estimated covariance matrix with non-positive determinant.
class InvalidEstimate : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace cvdistill
