#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hrtrust/core/geometry.hpp"
#include "hrtrust/core/stream.hpp"

namespace hrtrust {

/// Time-aligned motion streams for one task cycle.
struct CycleRecording {
    std::string cycle_id;
    std::string operator_id;
    double t_human = 0.0;  ///< human motion start, s
    double t_robot = 0.0;  ///< robot motion start, s
    Stream<Pose> head;
    Stream<Vec3> hand;
    Stream<Vec3> ee;

    [[nodiscard]] double duration() const { return head.empty() ? 0.0 : head.back().t; }

    friend bool operator==(const CycleRecording&, const CycleRecording&) = default;
};

/// Checks stream ordering, coverage of [0, duration] and that t_H, t_R lie inside it.
void validate(const CycleRecording& rec);

/// Resamples every stream onto the same uniform grid over [0, duration].
CycleRecording resample(const CycleRecording& rec, double dt = kDefaultDt);

/// JSONL: a header object {"cycle_id", "operator_id", "t_H", "t_R"} followed by one
/// object per sample {"t", "head": {"position", "orientation"}, "hand", "ee"}.
/// Writing requires the three streams to share timestamps.
void write_recording_jsonl(std::ostream& out, const CycleRecording& rec);
void write_recording_jsonl(const std::filesystem::path& path, const CycleRecording& rec);

/// Reads a recording as stored (no resampling).
CycleRecording read_recording_jsonl(std::istream& in);
CycleRecording read_recording_jsonl(const std::filesystem::path& path);

}  // namespace hrtrust
