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

#include <ostream>
#include <string>
#include <vector>

namespace usmae::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kNumeric = 4,
  kCompatibility = 5,
};

/// Runs one command line (without the program name). Errors are reported on
/// `err` and mapped onto the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Replaces "--config FILE" (or "--config=FILE") by the file's key=value
/// lines, written as "--key=value" ahead of the remaining flags so that
/// explicit flags win. Blank lines and lines starting with '#' or ';' are
/// skipped; "[section]" headers are ignored.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Default worker count: USMAE_THREADS if set to a positive integer, else 1.
unsigned default_threads();

}  // namespace usmae::cli
