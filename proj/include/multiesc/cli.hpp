/* Copyright 2026 The multiesc Authors. All Rights Reserved.

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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace multiesc::cli {

// Flat key=value settings; later sources override earlier ones.
class RunConfig {
 public:
  // '#' starts a comment. Errors: cli.BadConfig.
  static RunConfig parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void merge(const RunConfig& overrides);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback = "") const;
  // Errors: cli.BadConfig on unparsable values.
  double real(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  // Errors: cli.BadConfig when missing.
  std::string required(const std::string& key) const;

  // FNV-1a over the sorted key=value lines.
  std::string fingerprint() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Each command validates its settings before touching any input and throws
// multiesc::Error on failure.
void cmd_ingest(const RunConfig& config, std::ostream& out);
void cmd_train_ssg(const RunConfig& config, std::ostream& out);
void cmd_train_ufp(const RunConfig& config, std::ostream& out);
void cmd_plan(const RunConfig& config, std::ostream& out);
void cmd_eval(const RunConfig& config, std::ostream& out);
void cmd_sweep(const RunConfig& config, std::ostream& out);
void cmd_inspect_lexicon(const RunConfig& config, std::ostream& out);

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace multiesc::cli
