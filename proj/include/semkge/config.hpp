#pragma once
// Flat key=value training configs ('#' comments, blank lines ignored) plus
// preset resolution. Presets live in versioned config files named
// <dataset>.<model>.conf under the config directory (SEMKGE_CONFIG_DIR or
// ./configs), never in code.
//
// Recognized keys: model (transe|distmult|complex), norm (l1|l2), gamma,
// dim, epochs, max_steps, batch_size, k_neg, lr, optimizer (sgd|adagrad),
// adagrad_eps, loss (margin|logistic), margin, workers, seed, lambda,
// neg_scope (global|local).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "semkge/error.hpp"
#include "semkge/trainer.hpp"

namespace semkge {

class KvConfig {
 public:
  static KvConfig parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io, "cannot open config " + path.string());
    KvConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        fail(Errc::parse,
             path.string() + ":" + std::to_string(line_no) + ": expected key=value");
      }
      cfg.values_[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(Errc::parse, "config key " + key + ": not a number: " + v);
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    fail(Errc::parse, "config key " + key + ": not an unsigned integer: " + v);
  }
}

}  // namespace detail

inline TrainConfig train_config_from_kv(const KvConfig& kv) {
  TrainConfig cfg;
  const std::string model = kv.get("model", "transe");
  const std::string norm = kv.get("norm", "l2");
  if (norm != "l1" && norm != "l2") fail(Errc::parse, "config key norm must be l1 or l2");
  const double gamma = detail::to_double("gamma", kv.get("gamma", "1.0"));
  if (model == "transe") {
    cfg.model = ModelKind::transe(norm == "l1" ? Norm::l1 : Norm::l2, gamma);
  } else if (model == "distmult") {
    cfg.model = ModelKind::distmult();
  } else if (model == "complex") {
    cfg.model = ModelKind::complex();
  } else {
    fail(Errc::parse, "config key model must be transe, distmult or complex, got " + model);
  }

  cfg.dim = static_cast<std::uint32_t>(detail::to_u64("dim", kv.get("dim", "100")));
  cfg.epochs = static_cast<std::uint32_t>(detail::to_u64("epochs", kv.get("epochs", "100")));
  cfg.max_steps = detail::to_u64("max_steps", kv.get("max_steps", "0"));
  cfg.batch_size =
      static_cast<std::uint32_t>(detail::to_u64("batch_size", kv.get("batch_size", "128")));
  cfg.k_neg = static_cast<std::uint32_t>(detail::to_u64("k_neg", kv.get("k_neg", "1")));
  cfg.lr = detail::to_double("lr", kv.get("lr", "0.01"));

  const std::string opt = kv.get("optimizer", "sgd");
  if (opt == "sgd") cfg.optimizer = OptimizerKind::sgd;
  else if (opt == "adagrad") cfg.optimizer = OptimizerKind::adagrad;
  else fail(Errc::parse, "config key optimizer must be sgd or adagrad, got " + opt);
  cfg.adagrad_eps = detail::to_double("adagrad_eps", kv.get("adagrad_eps", "1e-8"));

  // default pairing: margin-ranking for TransE, logistic otherwise
  const std::string loss = kv.get("loss", model == "transe" ? "margin" : "logistic");
  if (loss == "margin") cfg.loss = LossKind::margin_ranking;
  else if (loss == "logistic") cfg.loss = LossKind::logistic;
  else fail(Errc::parse, "config key loss must be margin or logistic, got " + loss);

  cfg.margin = detail::to_double("margin", kv.get("margin", "1.0"));
  cfg.workers = static_cast<std::uint32_t>(detail::to_u64("workers", kv.get("workers", "1")));
  cfg.seed = detail::to_u64("seed", kv.get("seed", "0"));
  cfg.lambda = detail::to_double("lambda", kv.get("lambda", "0.0"));

  const std::string scope = kv.get("neg_scope", "global");
  if (scope == "global") cfg.scope = NegScope::global;
  else if (scope == "local") cfg.scope = NegScope::partition_local;
  else fail(Errc::parse, "config key neg_scope must be global or local, got " + scope);

  cfg.validate();
  return cfg;
}

// SEMKGE_CONFIG_DIR, else ./configs
inline std::filesystem::path config_dir() {
  if (const char* env = std::getenv("SEMKGE_CONFIG_DIR")) return env;
  return "configs";
}

inline std::filesystem::path preset_path(const std::string& dataset, const std::string& model) {
  return config_dir() / (dataset + "." + model + ".conf");
}

}  // namespace semkge
