#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "zat/core/params.hpp"

namespace zat {

inline constexpr int kCheckpointVersion = 1;

// Textual named-tensor container. Values are written as C99 hex floats so
// the round trip is bit-exact. Layout:
//   zatckpt <version>
//   meta <single-line string>
//   tensor <name> <rank> <dims...>
//   <values, space separated, one line>
//   ...
//   end
inline void save_checkpoint(const ParamSet& params, const std::string& meta,
                            const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "save_checkpoint: cannot open " + path);
  check(meta.find('\n') == std::string::npos, "save_checkpoint: meta must be one line");
  out << "zatckpt " << kCheckpointVersion << "\n";
  out << "meta " << meta << "\n";
  char buf[64];
  for (const auto& name : params.names()) {
    const Tensor& t = params[name];
    out << "tensor " << name << " " << t.rank();
    for (std::size_t d : t.shape) out << " " << d;
    out << "\n";
    for (std::size_t i = 0; i < t.numel(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", t.data[i]);
      out << (i ? " " : "") << buf;
    }
    out << "\n";
  }
  out << "end\n";
  check(out.good(), "save_checkpoint: write failed for " + path);
}

inline ParamSet load_checkpoint(const std::string& path, std::string* meta_out = nullptr) {
  std::ifstream in(path);
  check(in.good(), "load_checkpoint: cannot open " + path);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  check(tag == "zatckpt", "load_checkpoint: bad magic in " + path);
  check(version == kCheckpointVersion, "load_checkpoint: unsupported version");
  in >> tag;
  check(tag == "meta", "load_checkpoint: missing meta line");
  std::string meta;
  std::getline(in, meta);
  if (!meta.empty() && meta.front() == ' ') meta.erase(meta.begin());
  if (meta_out) *meta_out = meta;

  ParamSet params;
  while (in >> tag) {
    if (tag == "end") return params;
    check(tag == "tensor", "load_checkpoint: unexpected token " + tag);
    std::string name;
    std::size_t rank = 0;
    in >> name >> rank;
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) in >> d;
    Tensor t(shape);
    std::string tok;
    for (auto& v : t.data) {
      in >> tok;
      v = std::strtod(tok.c_str(), nullptr);
    }
    check(in.good(), "load_checkpoint: truncated tensor " + name);
    params.add(name, std::move(t));
  }
  throw std::runtime_error("load_checkpoint: missing end marker in " + path);
}

}  // namespace zat
