// Copyright 2026 The nnmm Authors. All Rights Reserved.
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

#include "nnmm/config.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nnmm/errors.h"

namespace nnmm {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(int line, std::string_view key,
                            std::string_view value) {
  throw std::invalid_argument("config line " + std::to_string(line) +
                              ": bad value '" + std::string(value) +
                              "' for " + std::string(key));
}

template <typename T>
T parse_number(int line, std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(line, key, value);
  }
  return out;
}

bool parse_bool(int line, std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(line, key, value);
}

}  // namespace

EnhancerConfig parse_config(std::string_view text, EnhancerConfig base) {
  EnhancerConfig cfg = base;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "sample_rate") {
      cfg.sample_rate = parse_number<int>(line_no, key, value);
    } else if (key == "frame_length") {
      cfg.frame_length = parse_number<int>(line_no, key, value);
    } else if (key == "beta") {
      cfg.beta = parse_number<double>(line_no, key, value);
    } else if (key == "alpha") {
      cfg.alpha = parse_number<double>(line_no, key, value);
    } else if (key == "noise_prefix") {
      cfg.noise_prefix_seconds = parse_number<double>(line_no, key, value);
    } else if (key == "estimator") {
      cfg.estimator = parse_estimator(std::string(value));
    } else if (key == "posterior") {
      cfg.posterior_source = parse_posterior_source(std::string(value));
    } else if (key == "adapt_noise") {
      cfg.adapt_noise = parse_bool(line_no, key, value);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

EnhancerConfig load_config(const std::string& path, EnhancerConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const EnhancerConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_rate = " << c.sample_rate << '\n'
      << "frame_length = " << c.frame_length << '\n'
      << "beta = " << c.beta << '\n'
      << "alpha = " << c.alpha << '\n'
      << "noise_prefix = " << c.noise_prefix_seconds << '\n'
      << "estimator = " << to_string(c.estimator) << '\n'
      << "posterior = " << to_string(c.posterior_source) << '\n'
      << "adapt_noise = " << (c.adapt_noise ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace nnmm
