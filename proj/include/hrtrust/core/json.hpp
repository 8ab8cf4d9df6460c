#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hrtrust/core/geometry.hpp"

namespace hrtrust {

using json = nlohmann::json;

// Vectors serialise as [x, y, z]; quaternions as [w, x, y, z].
void to_json(json& j, const Vec3& v);
void from_json(const json& j, Vec3& v);
void to_json(json& j, const Quat& q);
void from_json(const json& j, Quat& q);
void to_json(json& j, const Pose& p);
void from_json(const json& j, Pose& p);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hrtrust
