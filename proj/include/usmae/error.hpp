/* Copyright 2026 The usmae Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace usmae {

// Error hierarchy. Each category maps onto one CLI exit code (see cli/app.hpp).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument, malformed config, violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor extents that do not line up.
class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// NaN/Inf where finite values are required, undefined numeric quantities.
class NumericError : public Error {
 public:
  using Error::Error;
};

// File cannot be opened, is truncated or has a bad header.
class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint does not match the requested model configuration.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace usmae
