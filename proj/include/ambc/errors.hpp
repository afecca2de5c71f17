// SPDX-License-Identifier: Apache-2.0
//
// irs-ambc: IRS-assisted ambient backscatter link simulator and DDPG lab
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace ambc {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad shape, non-Hermitian input, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidGeometry : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Energies or quadratic forms that must be strictly positive were not.
class InvalidStatistics : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ShapeError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Operation called on an object in the wrong state (e.g. backward without forward).
class StateError : public Error {
public:
    using Error::Error;
};

// Iterative kernel failed.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, int iterations = 0)
        : Error(what), iterations_(iterations) {}

    int iterations() const noexcept { return iterations_; }

private:
    int iterations_;
};

class DefinitenessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Malformed config, CSV or checkpoint.
class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ambc
