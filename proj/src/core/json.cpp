#include "hrtrust/core/json.hpp"

#include <fstream>
#include <sstream>

#include "hrtrust/core/error.hpp"

namespace hrtrust {

void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

void from_json(const json& j, Vec3& v) {
    if (!j.is_array() || j.size() != 3) {
        throw InvalidInput("expected a 3-element array for a vector");
    }
    v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const Quat& q) { j = json::array({q.w, q.x, q.y, q.z}); }

void from_json(const json& j, Quat& q) {
    if (!j.is_array() || j.size() != 4) {
        throw InvalidInput("expected a 4-element array [w, x, y, z] for a quaternion");
    }
    q = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(json& j, const Pose& p) {
    j = json{{"position", p.position}, {"orientation", p.orientation}};
}

void from_json(const json& j, Pose& p) {
    p.position = j.at("position").get<Vec3>();
    p.orientation = j.at("orientation").get<Quat>();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace hrtrust
