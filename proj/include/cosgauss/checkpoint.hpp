// cosgauss/checkpoint.hpp
//
// Copyright 2026 The cosgauss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosgauss/classifier.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/cpc.hpp"
#include "cosgauss/optim.hpp"

namespace cosgauss {

inline constexpr int kCheckpointVersion = 1;

// Versioned parameter snapshot. Serialization is canonical: object keys
// sorted, every number rendered with 17 significant digits, LF endings.
// Identical parameters therefore produce byte-identical files.
struct Checkpoint {
  int format_version = kCheckpointVersion;
  std::string kind;  // "filterbank" | "cpc" | "backend"
  std::map<std::string, double> config;
  struct Array {
    std::vector<std::size_t> shape;
    Vec values;
  };
  std::map<std::string, Array> params;
  std::string provenance;

  const Array& array(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) fail("checkpoint: missing array " + name);
    return it->second;
  }
  bool has(const std::string& name) const { return params.count(name) > 0; }
  double cfg(const std::string& key) const {
    auto it = config.find(key);
    if (it == config.end()) fail("checkpoint: missing config key " + key);
    return it->second;
  }
};

namespace ckptdetail {

inline std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace ckptdetail

inline std::string to_canonical_json(const Checkpoint& c) {
  std::string out = "{\n";
  out += "  \"config\": {";
  bool first = true;
  for (const auto& [k, v] : c.config) {
    out += first ? "\n" : ",\n";
    out += "    \"" + ckptdetail::escape(k) + "\": " + ckptdetail::num17(v);
    first = false;
  }
  out += first ? "},\n" : "\n  },\n";
  out += "  \"format_version\": " + std::to_string(c.format_version) + ",\n";
  out += "  \"kind\": \"" + ckptdetail::escape(c.kind) + "\",\n";
  out += "  \"params\": {";
  first = true;
  for (const auto& [name, arr] : c.params) {
    out += first ? "\n" : ",\n";
    out += "    \"" + ckptdetail::escape(name) + "\": {\"shape\": [";
    for (std::size_t i = 0; i < arr.shape.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(arr.shape[i]);
    }
    out += "], \"values\": [";
    for (std::size_t i = 0; i < arr.values.size(); ++i) {
      if (i) out += ", ";
      out += ckptdetail::num17(arr.values[i]);
    }
    out += "]}";
    first = false;
  }
  out += first ? "},\n" : "\n  },\n";
  out += "  \"provenance\": \"" + ckptdetail::escape(c.provenance) + "\"\n";
  out += "}\n";
  return out;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("save_checkpoint: cannot open " + path);
  std::string body = to_canonical_json(c);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) fail("save_checkpoint: write failed: " + path);
}

// Parses and validates; throws on malformed JSON, unknown version or kind,
// or any shape/value-count mismatch. Never returns partial state.
inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    fail("load_checkpoint: parse error in " + path + ": " + e.what());
  }
  Checkpoint c;
  try {
    c.format_version = j.at("format_version").get<int>();
    if (c.format_version != kCheckpointVersion)
      fail("load_checkpoint: unsupported format_version " +
           std::to_string(c.format_version));
    c.kind = j.at("kind").get<std::string>();
    if (c.kind != "filterbank" && c.kind != "cpc" && c.kind != "backend")
      fail("load_checkpoint: unknown kind '" + c.kind + "'");
    for (const auto& [k, v] : j.at("config").items())
      c.config[k] = v.get<double>();
    for (const auto& [name, arr] : j.at("params").items()) {
      Checkpoint::Array a;
      for (const auto& s : arr.at("shape"))
        a.shape.push_back(s.get<std::size_t>());
      for (const auto& x : arr.at("values")) a.values.push_back(x.get<double>());
      std::size_t expect = 1;
      for (std::size_t s : a.shape) expect *= s;
      if (a.values.size() != expect)
        fail("load_checkpoint: array '" + name + "' declares " +
             std::to_string(expect) + " values but holds " +
             std::to_string(a.values.size()));
      c.params.emplace(name, std::move(a));
    }
    c.provenance = j.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    fail("load_checkpoint: malformed checkpoint " + path + ": " + e.what());
  }
  return c;
}

// --------------------------------------------------------------------------
// Conversions between live models and checkpoints.

inline void fill_params_from_refs(Checkpoint& c, const ParamRefs& refs) {
  for (const auto& r : refs) {
    Checkpoint::Array a;
    a.shape = r.shape;
    a.values.assign(r.data, r.data + r.size());
    c.params.emplace(r.name, std::move(a));
  }
}

// Copies every ref's array out of the checkpoint; names and sizes must match.
inline void apply_params_to_refs(const Checkpoint& c, const ParamRefs& refs) {
  for (const auto& r : refs) {
    const auto& a = c.array(r.name);
    if (a.values.size() != r.size())
      fail("checkpoint: array '" + r.name + "' size mismatch");
    std::copy(a.values.begin(), a.values.end(), r.data);
  }
}

inline void echo_fb_config(Checkpoint& c, const FilterbankParams& fb) {
  c.config["F"] = static_cast<double>(fb.num_filters());
  c.config["L"] = static_cast<double>(fb.kernel_len);
  c.config["mu_min"] = fb.mu_min;
  c.config["mu_max"] = fb.mu_max;
  c.config["eps"] = fb.eps;
}

inline void echo_frontend_config(Checkpoint& c, int sample_rate,
                                 std::size_t frame_len, std::size_t hop) {
  c.config["sample_rate"] = static_cast<double>(sample_rate);
  c.config["frame_len"] = static_cast<double>(frame_len);
  c.config["hop"] = static_cast<double>(hop);
}

inline Checkpoint checkpoint_from_backend(BackendModel& m,
                                          const std::string& provenance) {
  Checkpoint c;
  c.kind = "backend";
  echo_fb_config(c, m.fb);
  echo_frontend_config(c, m.sample_rate, m.frame_len, m.hop);
  c.config["relevance_hidden"] = static_cast<double>(m.relev.hidden());
  c.config["lstm_hidden"] = static_cast<double>(m.blstm1.fwd.hidden());
  c.config["delta_window"] = static_cast<double>(m.delta_window);
  fill_params_from_refs(c, param_refs(m));
  c.provenance = provenance;
  return c;
}

inline Checkpoint checkpoint_from_cpc(CpcModel& m,
                                      const std::string& provenance) {
  Checkpoint c;
  c.kind = "cpc";
  echo_fb_config(c, m.fb);
  echo_frontend_config(c, m.sample_rate, m.frame_len, m.hop);
  c.config["context_dim"] = static_cast<double>(m.gar.hidden());
  c.config["horizon"] = static_cast<double>(m.horizon());
  fill_params_from_refs(c, param_refs(m));
  c.provenance = provenance;
  return c;
}

// Filterbank-only checkpoint (mu plus, optionally, the relevance net), the
// unit of transfer between pretraining and fine-tuning runs.
inline Checkpoint checkpoint_from_filterbank(const FilterbankParams& fb,
                                             const RelevanceNet* relev,
                                             const std::string& provenance) {
  Checkpoint c;
  c.kind = "filterbank";
  echo_fb_config(c, fb);
  Checkpoint::Array mu;
  mu.shape = {fb.mu.size()};
  mu.values = fb.mu;
  c.params.emplace("fb.mu", std::move(mu));
  if (relev) {
    c.config["relevance_hidden"] = static_cast<double>(relev->hidden());
    RelevanceNet copy = *relev;
    ParamRefs refs;
    refdetail::append_relev(copy, refs);
    fill_params_from_refs(c, refs);
  }
  c.provenance = provenance;
  return c;
}

inline BackendModel backend_from_checkpoint(const Checkpoint& c) {
  if (c.kind != "backend")
    fail("backend_from_checkpoint: checkpoint kind is '" + c.kind + "'");
  BackendSetup s;
  s.num_filters = static_cast<std::size_t>(c.cfg("F"));
  s.kernel_len = static_cast<int>(c.cfg("L"));
  s.mu_min = c.cfg("mu_min");
  s.mu_max = c.cfg("mu_max");
  s.eps = c.cfg("eps");
  s.relevance_hidden = static_cast<std::size_t>(c.cfg("relevance_hidden"));
  s.lstm_hidden = static_cast<std::size_t>(c.cfg("lstm_hidden"));
  s.sample_rate = static_cast<int>(c.cfg("sample_rate"));
  s.frame_len = static_cast<std::size_t>(c.cfg("frame_len"));
  s.hop = static_cast<std::size_t>(c.cfg("hop"));
  s.delta_window = static_cast<int>(c.cfg("delta_window"));
  Rng rng(0);
  BackendModel m = make_backend(s, rng);
  apply_params_to_refs(c, param_refs(m));
  m.fb.validate();
  return m;
}

inline CpcModel cpc_from_checkpoint(const Checkpoint& c) {
  if (c.kind != "cpc")
    fail("cpc_from_checkpoint: checkpoint kind is '" + c.kind + "'");
  CpcSetup s;
  s.num_filters = static_cast<std::size_t>(c.cfg("F"));
  s.kernel_len = static_cast<int>(c.cfg("L"));
  s.mu_min = c.cfg("mu_min");
  s.mu_max = c.cfg("mu_max");
  s.eps = c.cfg("eps");
  s.sample_rate = static_cast<int>(c.cfg("sample_rate"));
  s.frame_len = static_cast<std::size_t>(c.cfg("frame_len"));
  s.hop = static_cast<std::size_t>(c.cfg("hop"));
  CpcConfig cc;
  cc.context_dim = static_cast<std::size_t>(c.cfg("context_dim"));
  cc.horizon = static_cast<int>(c.cfg("horizon"));
  Rng rng(0);
  CpcModel m = make_cpc(s, cc, rng);
  apply_params_to_refs(c, param_refs(m));
  m.fb.validate();
  return m;
}

// Initializes the target's filters (and optionally relevance net) from any
// checkpoint carrying fb.mu. F and L must match the target exactly. The
// checkpoint itself is never modified; freeze semantics are the training
// configuration's concern.
inline void transfer_filters(const Checkpoint& c, BackendModel& target,
                             bool include_relevance) {
  const auto& mu = c.array("fb.mu");
  if (mu.values.size() != target.fb.num_filters())
    fail("transfer_filters: checkpoint has F=" +
         std::to_string(mu.values.size()) + " but target has F=" +
         std::to_string(target.fb.num_filters()));
  if (static_cast<int>(c.cfg("L")) != target.fb.kernel_len)
    fail("transfer_filters: kernel_len mismatch (checkpoint L=" +
         std::to_string(static_cast<int>(c.cfg("L"))) + ", target L=" +
         std::to_string(target.fb.kernel_len) + ")");
  target.fb.mu = mu.values;
  target.fb.clamp_mu();
  target.fb.validate();
  if (include_relevance && c.has("relev.W1")) {
    const auto& w1 = c.array("relev.W1");
    if (w1.shape.size() != 2 || w1.shape[0] != kContextLen ||
        w1.shape[1] != target.relev.hidden())
      fail("transfer_filters: relevance net shape mismatch");
    ParamRefs refs;
    refdetail::append_relev(target.relev, refs);
    apply_params_to_refs(c, refs);
  }
}

}  // namespace cosgauss
