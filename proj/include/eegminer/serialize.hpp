#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "eegminer/model.hpp"

namespace eegminer {

using nlohmann::json;

inline FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "magnitude") return FeatureKind::Magnitude;
  if (name == "correlation") return FeatureKind::Correlation;
  if (name == "plv") return FeatureKind::Plv;
  throw std::invalid_argument("unknown feature kind '" + name + "'");
}

// Serialized bank: filter triples plus layout metadata, consumed by the
// export bundle and external plotting.
inline json bank_to_json(const FilterBank& bank) {
  json j;
  j["layout"] = bank.layout == BankLayout::PerElectrode ? "per_electrode" : "shared";
  j["n_channels"] = bank.n_channels;
  j["n_maps"] = bank.n_maps;
  j["group_delay_s"] = bank.group_delay_s;
  j["filters"] = json::array();
  for (const auto& p : bank.params) {
    j["filters"].push_back({{"mu_hz", p.mu},
                            {"h_hz", p.h},
                            {"beta_raw", p.beta_raw},
                            {"beta_eff", beta_eff_of(p)}});
  }
  return j;
}

inline FilterBank bank_from_json(const json& j) {
  FilterBank bank;
  const std::string layout = j.at("layout").get<std::string>();
  if (layout == "per_electrode") bank.layout = BankLayout::PerElectrode;
  else if (layout == "shared") bank.layout = BankLayout::SharedAcrossElectrodes;
  else throw std::invalid_argument("bank: unknown layout '" + layout + "'");
  bank.n_channels = j.at("n_channels").get<std::size_t>();
  bank.n_maps = j.at("n_maps").get<std::size_t>();
  bank.group_delay_s = j.at("group_delay_s").get<double>();
  for (const auto& f : j.at("filters")) {
    FilterParams p;
    p.mu = f.at("mu_hz").get<double>();
    p.h = f.at("h_hz").get<double>();
    p.beta_raw = f.at("beta_raw").get<double>();
    bank.params.push_back(p);
  }
  const std::size_t expected =
      bank.layout == BankLayout::PerElectrode ? bank.n_channels * bank.n_maps : bank.n_maps;
  if (bank.params.size() != expected)
    throw std::invalid_argument("bank: filter count does not match layout");
  return bank;
}

inline json head_to_json(const ClassifierParams& head, const BatchNormState& bn,
                         const std::string& index_map_ref = "index_map.json") {
  json j;
  j["weights"] = head.weights;
  j["bias"] = head.bias;
  j["running_mean"] = bn.running_mean;
  j["running_var"] = bn.running_var;
  j["bn_momentum"] = bn.momentum;
  j["bn_eps"] = bn.eps;
  j["feature_index_map_ref"] = index_map_ref;
  return j;
}

inline json model_state_to_json(const ModelState& st) {
  json j;
  j["format_version"] = 1;
  j["feature_kind"] = feature_kind_name(st.kind);
  j["bank"] = bank_to_json(st.bank);
  j["head"] = head_to_json(st.head, st.bn);
  j["velocities"] = {{"mu", st.vel_mu},
                     {"h", st.vel_h},
                     {"beta_raw", st.vel_beta},
                     {"weights", st.vel_weights},
                     {"bias", st.vel_bias}};
  j["step_counter"] = st.step_counter;
  return j;
}

inline ModelState model_state_from_json(const json& j) {
  if (j.at("format_version").get<int>() != 1)
    throw std::invalid_argument("checkpoint: unsupported format_version");
  ModelState st;
  st.kind = feature_kind_from_name(j.at("feature_kind").get<std::string>());
  st.bank = bank_from_json(j.at("bank"));
  const json& h = j.at("head");
  st.head.weights = h.at("weights").get<std::vector<double>>();
  st.head.bias = h.at("bias").get<double>();
  st.bn.running_mean = h.at("running_mean").get<std::vector<double>>();
  st.bn.running_var = h.at("running_var").get<std::vector<double>>();
  st.bn.momentum = h.at("bn_momentum").get<double>();
  st.bn.eps = h.at("bn_eps").get<double>();
  st.bn.mode = BnMode::Eval;
  const json& v = j.at("velocities");
  st.vel_mu = v.at("mu").get<std::vector<double>>();
  st.vel_h = v.at("h").get<std::vector<double>>();
  st.vel_beta = v.at("beta_raw").get<std::vector<double>>();
  st.vel_weights = v.at("weights").get<std::vector<double>>();
  st.vel_bias = v.at("bias").get<double>();
  st.step_counter = j.at("step_counter").get<std::uint64_t>();

  if (st.bank.layout != required_layout(st.kind))
    throw std::invalid_argument("checkpoint: bank layout does not match the feature kind");
  const std::size_t D = feature_dim(st.kind, st.bank.n_channels, st.bank.n_maps);
  if (st.head.weights.size() != D || st.bn.running_mean.size() != D ||
      st.bn.running_var.size() != D)
    throw std::invalid_argument("checkpoint: dimension mismatch between head and bank");
  return st;
}

inline json feature_index_map_to_json(FeatureKind kind, std::size_t C, std::size_t K) {
  json j;
  j["feature_kind"] = feature_kind_name(kind);
  j["n_channels"] = C;
  j["n_maps"] = K;
  j["entries"] = json::array();
  for (const auto& e : feature_index_map(kind, C, K)) {
    if (kind == FeatureKind::Magnitude) {
      j["entries"].push_back({{"index", e.index}, {"map", e.map}, {"channel", e.channel_a}});
    } else {
      j["entries"].push_back({{"index", e.index},
                              {"map", e.map},
                              {"channel_a", e.channel_a},
                              {"channel_b", e.channel_b}});
    }
  }
  return j;
}

}  // namespace eegminer
