#ifndef GFSIM_CONFIG_HPP
#define GFSIM_CONFIG_HPP

// JSON configuration files.
//
//   {"n_sites": 6,
//    "frequencies": [1.0, ...] | {"preset": "resonant" | "switching", "C": 1.0, "m": 1, "n": 5},
//    "J": 0.0013, "eta": 0.0, "gamma": 0.0}
//
// Field names are fixed and unknown fields are rejected.

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "gfsim/model.hpp"

namespace gfsim {

/// A parsed configuration plus how its frequency vector was produced.
struct ConfigFile {
  ArrayConfig config;
  std::string frequency_preset = "explicit"; // explicit | resonant | switching
  double base_frequency = 1.0;
  std::optional<SitePair> switching_pair;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown field '" + key + "' in " + where);
}

template <class T>
T required(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing field '") + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "' in " + where + ": " + e.what());
  }
}

template <class T>
T optional_field(const nlohmann::json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? required<T>(obj, key, where) : fallback;
}

inline std::size_t site_index(const nlohmann::json& obj, const char* key) {
  const auto v = required<long long>(obj, key, "frequencies preset");
  if (v < 1) throw ConfigError(std::string("site index '") + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

} // namespace detail

inline ConfigFile parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  detail::reject_unknown(j, {"n_sites", "frequencies", "J", "eta", "gamma"}, "configuration");

  const auto n_raw = detail::required<long long>(j, "n_sites", "configuration");
  if (n_raw < 2) throw ConfigError("n_sites must be at least 2");
  ConfigFile out;
  auto& c = out.config;
  c.n_sites = static_cast<std::size_t>(n_raw);
  c.coupling_scale = detail::required<double>(j, "J", "configuration");
  c.coupling_phase = detail::optional_field<double>(j, "eta", 0.0, "configuration");
  c.decay_rate = detail::optional_field<double>(j, "gamma", 0.0, "configuration");

  if (!j.contains("frequencies")) throw ConfigError("missing field 'frequencies' in configuration");
  const auto& f = j.at("frequencies");
  if (f.is_array()) {
    c.frequencies = detail::required<std::vector<double>>(j, "frequencies", "configuration");
    out.base_frequency = c.frequencies.empty() ? 1.0 : c.frequencies.front();
  } else if (f.is_object()) {
    const auto preset = detail::required<std::string>(f, "preset", "frequencies");
    out.base_frequency = detail::optional_field<double>(f, "C", 1.0, "frequencies");
    if (preset == "resonant") {
      detail::reject_unknown(f, {"preset", "C"}, "resonant frequencies preset");
      if (!(out.base_frequency > 0.0)) throw ConfigError("C must be positive");
      c.frequencies.assign(c.n_sites, out.base_frequency);
    } else if (preset == "switching") {
      detail::reject_unknown(f, {"preset", "C", "m", "n"}, "switching frequencies preset");
      const SitePair pair{detail::site_index(f, "m"), detail::site_index(f, "n")};
      c.frequencies = switching_frequencies(out.base_frequency, pair.source, pair.target, c.n_sites);
      out.switching_pair = pair;
    } else {
      throw ConfigError("unknown frequencies preset '" + preset + "'");
    }
    out.frequency_preset = preset;
  } else {
    throw ConfigError("'frequencies' must be an array or a preset object");
  }
  c.validate();
  return out;
}

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

/// Fully resolved configuration (explicit frequency vector).
inline nlohmann::json to_json(const ArrayConfig& c) {
  return {{"n_sites", c.n_sites},
          {"frequencies", c.frequencies},
          {"J", c.coupling_scale},
          {"eta", c.coupling_phase},
          {"gamma", c.decay_rate}};
}

} // namespace gfsim

#endif
