#include "hrtrust/core/recording.hpp"

#include <fstream>
#include <sstream>

#include "hrtrust/core/json.hpp"

namespace hrtrust {

namespace {

template <class T>
void check_coverage(const Stream<T>& s, double t_end, const char* name) {
    if (s.size() < 2) {
        throw InvalidInput(std::string("recording stream '") + name + "' needs at least two samples");
    }
    check_increasing(s);
    if (s.front().t > 1e-9 || std::abs(s.back().t - t_end) > 1e-6) {
        throw InvalidInput(std::string("recording stream '") + name + "' must cover [0, duration]");
    }
}

}  // namespace

void validate(const CycleRecording& rec) {
    const double end = rec.duration();
    check_coverage(rec.head, end, "head");
    check_coverage(rec.hand, end, "hand");
    check_coverage(rec.ee, end, "ee");
    for (const auto& s : rec.head) {
        if (!s.value.is_valid()) {
            throw InvalidInput("recording head pose has a non-unit quaternion or non-finite position");
        }
    }
    if (rec.t_human < 0.0 || rec.t_human > end || rec.t_robot < 0.0 || rec.t_robot > end) {
        throw InvalidInput("t_H and t_R must lie within the recording");
    }
}

CycleRecording resample(const CycleRecording& rec, double dt) {
    validate(rec);
    CycleRecording out = rec;
    out.head = resample_uniform(rec.head, dt);
    out.hand = resample_uniform(rec.hand, dt);
    out.ee = resample_uniform(rec.ee, dt);
    return out;
}

void write_recording_jsonl(std::ostream& out, const CycleRecording& rec) {
    if (rec.head.size() != rec.hand.size() || rec.head.size() != rec.ee.size()) {
        throw InvalidInput("write_recording_jsonl: streams must share timestamps");
    }
    const json header{{"cycle_id", rec.cycle_id},
                      {"operator_id", rec.operator_id},
                      {"t_H", rec.t_human},
                      {"t_R", rec.t_robot}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < rec.head.size(); ++i) {
        if (rec.hand[i].t != rec.head[i].t || rec.ee[i].t != rec.head[i].t) {
            throw InvalidInput("write_recording_jsonl: streams must share timestamps");
        }
        const json row{{"t", rec.head[i].t},
                       {"head", rec.head[i].value},
                       {"hand", rec.hand[i].value},
                       {"ee", rec.ee[i].value}};
        out << row.dump() << '\n';
    }
}

void write_recording_jsonl(const std::filesystem::path& path, const CycleRecording& rec) {
    std::ostringstream ss;
    write_recording_jsonl(ss, rec);
    write_text_file(path, ss.str());
}

CycleRecording read_recording_jsonl(std::istream& in) {
    CycleRecording rec;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InvalidInput("recording line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            rec.cycle_id = j.at("cycle_id").get<std::string>();
            rec.operator_id = j.at("operator_id").get<std::string>();
            rec.t_human = j.at("t_H").get<double>();
            rec.t_robot = j.at("t_R").get<double>();
            have_header = true;
            continue;
        }
        const double t = j.at("t").get<double>();
        rec.head.push_back({t, j.at("head").get<Pose>()});
        rec.hand.push_back({t, j.at("hand").get<Vec3>()});
        rec.ee.push_back({t, j.at("ee").get<Vec3>()});
    }
    if (!have_header) {
        throw InvalidInput("recording has no header line");
    }
    return rec;
}

CycleRecording read_recording_jsonl(const std::filesystem::path& path) {
    std::istringstream ss(read_text_file(path));
    return read_recording_jsonl(ss);
}

}  // namespace hrtrust
