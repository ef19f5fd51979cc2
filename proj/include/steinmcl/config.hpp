#pragma once

#include <map>
#include <string>
#include <vector>

#include "steinmcl/filter.hpp"

namespace steinmcl {

// Flat "key = value" text files; '#' starts a comment. Unknown keys are
// errors so typos never pass silently.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::string& path);

// Applies recognized keys to the config and erases them from kv. See the
// README for the documented key list.
void apply_filter_config(KeyValues& kv, FilterConfig& cfg);

// Throws listing any keys still present (unknown to every consumer).
void reject_unknown_keys(const KeyValues& kv, const std::string& context);

double kv_double(const KeyValues& kv, const std::string& key, double fallback);
int kv_int(const KeyValues& kv, const std::string& key, int fallback);
bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback);
std::string kv_string(const KeyValues& kv, const std::string& key,
                      const std::string& fallback);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace steinmcl
