#include "steinmcl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace steinmcl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

namespace {

template <class T, class Parse>
void take(KeyValues& kv, const std::string& key, T& out, Parse&& parse) {
  const auto it = kv.find(key);
  if (it == kv.end()) return;
  out = parse(it->second);
  kv.erase(it);
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number: " + s);
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);  // accepts 1e5 style counts
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::runtime_error("bad bool: " + s);
}

}  // namespace

void apply_filter_config(KeyValues& kv, FilterConfig& cfg) {
  take(kv, "n_particles", cfg.n_particles, to_int);
  take(kv, "sigma_r", cfg.kernel.sigma_r, to_double);
  take(kv, "sigma_t", cfg.kernel.sigma_t, to_double);
  take(kv, "repulsion_gain", cfg.kernel.repulsion_gain, to_double);
  take(kv, "k_neighbors", cfg.lsh.k_neighbors, to_int);
  take(kv, "lsh_alpha", cfg.lsh.alpha, to_double);
  take(kv, "lsh_noise_sigma", cfg.lsh.noise_sigma, to_double);
  take(kv, "lsh_buckets_factor", cfg.lsh.buckets_factor, to_double);
  take(kv, "lsh_n_buckets", cfg.lsh.n_buckets, to_int);
  take(kv, "lsh_bucket_capacity", cfg.lsh.bucket_capacity, to_int);
  take(kv, "reorder_particles", cfg.lsh.reorder_particles, to_bool);
  take(kv, "nnf_resolution", cfg.nnf_resolution, to_double);
  take(kv, "nnf_max_query_dist", cfg.nnf_max_query_dist, to_double);
  take(kv, "nnf_padding", cfg.nnf_padding, to_double);
  take(kv, "smooth_iters", cfg.smooth_iters, to_int);
  take(kv, "beta", cfg.beta, to_double);
  take(kv, "n_svgd_iters", cfg.n_svgd_iters, to_int);
  take(kv, "gn_scan_stride", cfg.gn_scan_stride, to_int);
  take(kv, "omega_max", cfg.gicp.limits.omega_max, to_double);
  take(kv, "v_max", cfg.gicp.limits.v_max, to_double);
  take(kv, "damping_scale", cfg.gicp.damping_scale, to_double);
  take(kv, "min_match_fraction", cfg.gicp.min_match_fraction, to_double);
  take(kv, "miss_cost", cfg.gicp.miss_cost, to_double);
  take(kv, "log_post_floor", cfg.log_post_floor, to_double);
  take(kv, "covariance_k", cfg.covariance_k, to_int);
  take(kv, "epsilon_plane", cfg.epsilon_plane, to_double);
  take(kv, "n_scan_max", cfg.n_scan_max, to_int);
  take(kv, "scan_voxel_leaf", cfg.scan_voxel_leaf, to_double);
  take(kv, "sensor_noise_sigma", cfg.sensor_noise_sigma, to_double);
  take(kv, "diffusion_sigma_rot", cfg.diffusion_sigma_rot, to_double);
  take(kv, "diffusion_sigma_trans", cfg.diffusion_sigma_trans, to_double);
  take(kv, "full_rotation", cfg.full_rotation, to_bool);
  take(kv, "seed", cfg.seed, [](const std::string& s) {
    return static_cast<std::uint64_t>(std::stoull(s));
  });
}

void reject_unknown_keys(const KeyValues& kv, const std::string& context) {
  if (kv.empty()) return;
  std::string msg = "unknown keys in " + context + ":";
  for (const auto& [k, v] : kv) msg += " " + k;
  throw std::runtime_error(msg);
}

double kv_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : to_double(it->second);
}

int kv_int(const KeyValues& kv, const std::string& key, int fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : to_int(it->second);
}

bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : to_bool(it->second);
}

std::string kv_string(const KeyValues& kv, const std::string& key,
                      const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(to_double(t));
  }
  return out;
}

}  // namespace steinmcl
