#pragma once

#include "sbm/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sbm::config {

// Keys accepted in a config file, in canonical order.
const std::vector<std::string>& config_keys();

// Set one key on cfg; throws InputError on an unknown key or bad value.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment; later keys win.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

// One "key=value" line per config key, in canonical order.
std::string to_kv(const PipelineConfig& cfg);

}  // namespace sbm::config
