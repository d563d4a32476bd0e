// Copyright 2026 The abcrl Authors.
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

/*!
  \file aiger.hpp
  \brief Reader and writer for combinational AIGER files (ASCII "aag" and binary "aig").
*/

#pragma once

#include "aig.hpp"
#include "errors.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace abcrl {

enum class AigerFormat { ascii, binary };

namespace detail {

class AigerCursor {
 public:
  explicit AigerCursor(std::string_view data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ >= data_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_spaces() {
    while (pos_ < data_.size() && data_[pos_] == ' ') ++pos_;
  }

  void expect(char c) {
    if (pos_ >= data_.size() || data_[pos_] != c) {
      fail(std::string("expected ") + (c == '\n' ? "newline" : std::string(1, c)));
    }
    ++pos_;
  }

  std::string_view word() {
    skip_spaces();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && data_[pos_] != ' ' && data_[pos_] != '\n') ++pos_;
    return data_.substr(start, pos_ - start);
  }

  uint64_t number() {
    skip_spaces();
    if (pos_ >= data_.size() || data_[pos_] < '0' || data_[pos_] > '9') fail("expected unsigned integer");
    uint64_t v = 0;
    while (pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '9') {
      v = v * 10 + static_cast<uint64_t>(data_[pos_] - '0');
      if (v > 0xFFFFFFFFull) fail("integer out of range");
      ++pos_;
    }
    return v;
  }

  bool line_has_more() {
    skip_spaces();
    return pos_ < data_.size() && data_[pos_] != '\n';
  }

  uint32_t varint() {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
      if (pos_ >= data_.size()) fail("truncated binary AND section");
      const auto byte = static_cast<uint8_t>(data_[pos_++]);
      v |= uint64_t{byte & 0x7Fu} << shift;
      if (!(byte & 0x80u)) break;
      shift += 7;
      if (shift > 35) fail("binary delta too long");
    }
    if (v > 0xFFFFFFFFull) fail("binary delta out of range");
    return static_cast<uint32_t>(v);
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline void put_varint(std::string& out, uint32_t v) {
  while (v & ~0x7Fu) {
    out.push_back(static_cast<char>((v & 0x7Fu) | 0x80u));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

}  // namespace detail

/// Parses ASCII or binary AIGER without latches. ASCII AND definitions may
/// appear in any order; the result is renumbered topologically.
inline Aig parse_aiger(std::string_view bytes, std::string name = {}) {
  detail::AigerCursor in(bytes);
  const auto magic = in.word();
  bool binary = false;
  if (magic == "aig") {
    binary = true;
  } else if (magic != "aag") {
    throw ParseError("unknown AIGER magic '" + std::string(magic) + "'", 0);
  }
  const auto max_var = in.number();
  const auto num_inputs = in.number();
  const std::size_t latch_offset = in.offset();
  const auto num_latches = in.number();
  const auto num_outputs = in.number();
  const auto num_ands = in.number();
  while (in.line_has_more()) {
    const std::size_t at = in.offset();
    if (in.number() != 0) throw ParseError("extended AIGER sections (B/C/J/F) are not supported", at);
  }
  in.expect('\n');
  if (num_latches != 0) throw ParseError("latches are not supported (L = " + std::to_string(num_latches) + ")", latch_offset);
  if (max_var < num_inputs + num_ands) throw ParseError("header M is smaller than I + L + A", 0);
  if (binary && max_var != num_inputs + num_ands) throw ParseError("binary AIGER requires M = I + L + A", 0);

  // var -> node index in the result, or kUnset.
  constexpr uint32_t kUnset = 0xFFFFFFFFu;
  std::vector<uint32_t> node_of(max_var + 1, kUnset);
  node_of[0] = 0;

  struct Def {
    uint32_t lhs_var;
    uint32_t rhs0, rhs1;
    std::size_t offset;
  };
  std::vector<Def> defs;
  defs.reserve(num_ands);
  std::vector<std::size_t> output_offsets;
  std::vector<uint32_t> output_raw;

  auto check_lit = [&](uint64_t lit, std::size_t at) {
    if ((lit >> 1) > max_var) throw ParseError("literal " + std::to_string(lit) + " exceeds M", at);
    return static_cast<uint32_t>(lit);
  };

  if (binary) {
    for (uint32_t i = 0; i < num_inputs; ++i) node_of[i + 1] = i + 1;
  } else {
    for (uint32_t i = 0; i < num_inputs; ++i) {
      const std::size_t at = in.offset();
      const auto lit = check_lit(in.number(), at);
      in.expect('\n');
      if ((lit & 1u) || lit < 2) throw ParseError("input literal must be a positive even literal", at);
      if (node_of[lit >> 1] != kUnset) throw ParseError("variable defined twice", at);
      node_of[lit >> 1] = i + 1;
    }
  }
  for (uint32_t i = 0; i < num_outputs; ++i) {
    const std::size_t at = in.offset();
    output_raw.push_back(check_lit(in.number(), at));
    output_offsets.push_back(at);
    in.expect('\n');
  }
  std::vector<std::size_t> def_of(max_var + 1, kUnset);
  for (uint32_t i = 0; i < num_ands; ++i) {
    const std::size_t at = in.offset();
    Def d{};
    d.offset = at;
    if (binary) {
      const uint32_t lhs = 2 * (static_cast<uint32_t>(num_inputs) + i + 1);
      const uint32_t delta0 = in.varint();
      const uint32_t delta1 = in.varint();
      if (delta0 == 0 || delta0 > lhs) throw ParseError("invalid binary delta", at);
      d.lhs_var = lhs >> 1;
      d.rhs0 = lhs - delta0;
      if (delta1 > d.rhs0) throw ParseError("invalid binary delta", at);
      d.rhs1 = d.rhs0 - delta1;
    } else {
      const auto lhs = check_lit(in.number(), at);
      const std::size_t r0 = in.offset();
      d.rhs0 = check_lit(in.number(), r0);
      const std::size_t r1 = in.offset();
      d.rhs1 = check_lit(in.number(), r1);
      in.expect('\n');
      if ((lhs & 1u) || lhs < 2) throw ParseError("AND output must be a positive even literal", at);
      d.lhs_var = lhs >> 1;
      if (node_of[d.lhs_var] != kUnset || def_of[d.lhs_var] != kUnset) throw ParseError("variable defined twice", at);
    }
    def_of[d.lhs_var] = defs.size();
    defs.push_back(d);
  }

  // Topological renumbering: definitions are emitted in file order unless a
  // fan-in is defined later, in which case it is pulled forward.
  std::vector<AndNode> ands;
  ands.reserve(num_ands);
  std::vector<uint8_t> state(defs.size(), 0);  // 0 new, 1 on stack, 2 done
  auto map_lit = [&](uint32_t raw, std::size_t at) {
    const uint32_t var = raw >> 1;
    if (node_of[var] == kUnset) throw ParseError("dangling literal " + std::to_string(raw), at);
    return Literal(node_of[var], raw & 1u);
  };
  const uint32_t first_and = 1 + static_cast<uint32_t>(num_inputs);
  std::vector<std::size_t> stack;
  for (std::size_t root = 0; root < defs.size(); ++root) {
    if (state[root] == 2) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const std::size_t d = stack.back();
      if (state[d] == 2) {
        stack.pop_back();
        continue;
      }
      state[d] = 1;
      bool ready = true;
      for (uint32_t rhs : {defs[d].rhs0, defs[d].rhs1}) {
        const uint32_t var = rhs >> 1;
        if (node_of[var] != kUnset) continue;
        const std::size_t dep = def_of[var];
        if (dep == kUnset) throw ParseError("dangling literal " + std::to_string(rhs), defs[d].offset);
        if (state[dep] == 1) throw ParseError("combinational cycle through variable " + std::to_string(var), defs[d].offset);
        stack.push_back(dep);
        ready = false;
      }
      if (!ready) continue;
      ands.push_back({map_lit(defs[d].rhs0, defs[d].offset), map_lit(defs[d].rhs1, defs[d].offset)});
      node_of[defs[d].lhs_var] = first_and + static_cast<uint32_t>(ands.size() - 1);
      state[d] = 2;
      stack.pop_back();
    }
  }
  std::vector<Literal> outputs;
  outputs.reserve(output_raw.size());
  for (std::size_t i = 0; i < output_raw.size(); ++i) outputs.push_back(map_lit(output_raw[i], output_offsets[i]));
  return Aig(std::move(name), static_cast<uint32_t>(num_inputs), std::move(ands), std::move(outputs));
}

inline std::string write_aiger(const Aig& g, AigerFormat format) {
  std::string out;
  const uint32_t m = g.num_pis() + g.num_ands();
  out += (format == AigerFormat::binary ? "aig " : "aag ");
  out += std::to_string(m) + " " + std::to_string(g.num_pis()) + " 0 " + std::to_string(g.num_pos()) + " " +
         std::to_string(g.num_ands()) + "\n";
  if (format == AigerFormat::ascii) {
    for (uint32_t i = 0; i < g.num_pis(); ++i) out += std::to_string(2 * (i + 1)) + "\n";
  }
  for (auto o : g.outputs()) out += std::to_string(o.raw()) + "\n";
  for (uint32_t n = g.first_and(); n < g.size(); ++n) {
    const uint32_t lhs = 2 * n;
    const auto& a = g.and_node(n);
    if (format == AigerFormat::ascii) {
      out += std::to_string(lhs) + " " + std::to_string(a.fanin0.raw()) + " " + std::to_string(a.fanin1.raw()) + "\n";
    } else {
      detail::put_varint(out, lhs - a.fanin0.raw());
      detail::put_varint(out, a.fanin0.raw() - a.fanin1.raw());
    }
  }
  return out;
}

inline Aig read_aiger_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_aiger(bytes, path.stem().string());
}

inline void write_aiger_file(const Aig& g, const std::filesystem::path& path) {
  const auto format = path.extension() == ".aag" ? AigerFormat::ascii : AigerFormat::binary;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  const auto bytes = write_aiger(g, format);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace abcrl
