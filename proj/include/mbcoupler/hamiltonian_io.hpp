// Copyright 2026 The mbcoupler Authors
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

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mbcoupler/spin.hpp"

namespace mbc {

// Line-oriented text format:
//   # comment
//   n <spin count>
//   c <constant>
//   t <weight> <i1> <i2> ...     (0-based indices)
// The writer emits the canonical form: terms sorted by (order, support).

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_hamiltonian(std::ostream& os, const IsingHamiltonian& h) {
  os << "n " << h.n() << "\n";
  if (h.constant() != 0.0) os << "c " << format_double(h.constant()) << "\n";
  for (const Term& t : h.terms()) {
    os << "t " << format_double(t.weight);
    for (int i = 0; i < h.n(); ++i)
      if ((t.support >> i) & 1) os << ' ' << i;
    os << "\n";
  }
}

inline std::string hamiltonian_to_string(const IsingHamiltonian& h) {
  std::ostringstream os;
  write_hamiltonian(os, h);
  return os.str();
}

inline IsingHamiltonian read_hamiltonian(std::istream& is) {
  std::optional<IsingHamiltonian> h;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    const std::string where = " at line " + std::to_string(lineno);
    if (tag == "n") {
      int n = 0;
      if (!(ls >> n)) throw std::invalid_argument("bad spin count" + where);
      if (h) throw std::invalid_argument("duplicate 'n' record" + where);
      h.emplace(n);
    } else if (tag == "c") {
      double c = 0.0;
      if (!(ls >> c)) throw std::invalid_argument("bad constant" + where);
      if (!h) throw std::invalid_argument("'c' before 'n'" + where);
      h->set_constant(h->constant() + c);
    } else if (tag == "t") {
      double w = 0.0;
      if (!(ls >> w)) throw std::invalid_argument("bad term weight" + where);
      if (!h) throw std::invalid_argument("'t' before 'n'" + where);
      std::vector<int> support;
      int idx = 0;
      while (ls >> idx) support.push_back(idx);
      if (!ls.eof())
        throw std::invalid_argument("bad term index" + where);
      if (support.empty())
        throw std::invalid_argument("term with empty support" + where);
      try {
        h->add_term(support, w);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(e.what()) + where);
      }
    } else {
      throw std::invalid_argument("unknown record '" + tag + "'" + where);
    }
  }
  if (!h) throw std::invalid_argument("no 'n' record found");
  return *h;
}

inline IsingHamiltonian hamiltonian_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_hamiltonian(is);
}

}  // namespace mbc
