#pragma once

#include <azvd/decimal.hpp>
#include <azvd/error.hpp>
#include <azvd/expression.hpp>

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace azvd {

/// Body articulators, in export order.
enum class Track { rhand, lhand, mouth, eyes, brows, gaze, head, torso };

inline constexpr std::size_t kTrackCount = 8;
inline constexpr std::array<Track, kTrackCount> kAllTracks = {
    Track::rhand, Track::lhand, Track::mouth, Track::eyes,
    Track::brows, Track::gaze,  Track::head,  Track::torso};

inline std::string_view to_string(Track t) {
    static constexpr std::array<std::string_view, kTrackCount> names = {
        "rhand", "lhand", "mouth", "eyes", "brows", "gaze", "head", "torso"};
    return names[static_cast<std::size_t>(t)];
}

inline std::optional<Track> track_from_string(std::string_view name) {
    for (Track t : kAllTracks)
        if (to_string(t) == name) return t;
    return std::nullopt;
}

struct TimedBlock {
    Decimal start;
    Decimal end;
    std::string label;

    friend bool operator==(const TimedBlock&, const TimedBlock&) = default;
};

/// Failure while building a score. Evaluation attaches the path of the
/// innermost rule node whose body raised it.
class ScoreError : public Error {
public:
    using Error::Error;

    const std::optional<Path>& path() const { return path_; }
    void set_path(Path p) { path_ = std::move(p); }

private:
    std::optional<Path> path_;
};

class NonPositiveDuration : public ScoreError {
public:
    using ScoreError::ScoreError;
};

/// Two blocks on one track overlap.
class TrackCollision : public ScoreError {
public:
    TrackCollision(Track track, Decimal time)
        : ScoreError("track collision on " + std::string(to_string(track)) + " at " + time.to_string()),
          track_(track), time_(time) {}

    Track track() const { return track_; }
    Decimal time() const { return time_; }

private:
    Track track_;
    Decimal time_;
};

/// A timeline of form blocks, one sorted non-overlapping list per track.
///
/// A score with no blocks and zero duration is the empty score, the identity
/// of both `seq` and `sync`. A score with no blocks but positive duration is
/// a pause.
class SigningScore {
public:
    SigningScore() = default;

    static SigningScore block(std::span<const Track> tracks, std::string label, Decimal duration) {
        if (!duration.is_positive())
            throw NonPositiveDuration("block '" + label + "' has non-positive duration " + duration.to_string());
        if (tracks.empty()) throw Error("block '" + label + "' names no tracks");
        SigningScore s;
        s.duration_ = duration;
        for (Track t : tracks) {
            auto& lane = s.lanes_[static_cast<std::size_t>(t)];
            if (lane.empty()) lane.push_back({Decimal{}, duration, label});
        }
        return s;
    }

    static SigningScore block(std::initializer_list<Track> tracks, std::string label, Decimal duration) {
        return block(std::span<const Track>(tracks.begin(), tracks.size()), std::move(label), duration);
    }

    static SigningScore pause(Decimal duration) {
        if (duration.is_negative()) throw NonPositiveDuration("negative pause " + duration.to_string());
        SigningScore s;
        s.duration_ = duration;
        return s;
    }

    Decimal duration() const { return duration_; }
    const std::vector<TimedBlock>& blocks(Track t) const { return lanes_[static_cast<std::size_t>(t)]; }

    bool has_blocks() const {
        return std::any_of(lanes_.begin(), lanes_.end(), [](const auto& l) { return !l.empty(); });
    }
    bool is_empty() const { return duration_.is_zero() && !has_blocks(); }
    std::size_t block_count() const {
        std::size_t n = 0;
        for (const auto& l : lanes_) n += l.size();
        return n;
    }

    /// `b` follows `a`.
    friend SigningScore seq(const SigningScore& a, const SigningScore& b) {
        SigningScore out = a;
        for (std::size_t t = 0; t < kTrackCount; ++t)
            for (const auto& blk : b.lanes_[t])
                out.lanes_[t].push_back({blk.start + a.duration_, blk.end + a.duration_, blk.label});
        out.duration_ = a.duration_ + b.duration_;
        return out;
    }

    /// `overlay` placed at `offset` relative to the origin of `base`; the
    /// union is shifted so that it starts at 0.
    friend SigningScore sync(const SigningScore& base, const SigningScore& overlay, Decimal offset) {
        if (overlay.is_empty()) return base;
        if (base.is_empty()) return overlay;
        const Decimal lo = std::min(Decimal{}, offset);
        const Decimal hi = std::max(base.duration_, offset + overlay.duration_);
        const Decimal base_shift = -lo;
        const Decimal overlay_shift = offset - lo;

        SigningScore out;
        out.duration_ = hi - lo;
        for (std::size_t t = 0; t < kTrackCount; ++t) {
            auto& lane = out.lanes_[t];
            for (const auto& blk : base.lanes_[t])
                lane.push_back({blk.start + base_shift, blk.end + base_shift, blk.label});
            for (const auto& blk : overlay.lanes_[t])
                lane.push_back({blk.start + overlay_shift, blk.end + overlay_shift, blk.label});
            std::stable_sort(lane.begin(), lane.end(),
                             [](const TimedBlock& x, const TimedBlock& y) { return x.start < y.start; });
            for (std::size_t k = 1; k < lane.size(); ++k)
                if (lane[k].start < lane[k - 1].end) throw TrackCollision(kAllTracks[t], lane[k].start);
        }
        return out;
    }

    /// Drops leading silence so the earliest block starts at 0.
    SigningScore normalized() const {
        if (!has_blocks()) return *this;
        Decimal first = duration_;
        for (const auto& l : lanes_)
            if (!l.empty()) first = std::min(first, l.front().start);
        if (first.is_zero()) return *this;
        SigningScore out;
        out.duration_ = duration_ - first;
        for (std::size_t t = 0; t < kTrackCount; ++t)
            for (const auto& blk : lanes_[t]) out.lanes_[t].push_back({blk.start - first, blk.end - first, blk.label});
        return out;
    }

    friend bool operator==(const SigningScore&, const SigningScore&) = default;

private:
    Decimal duration_;
    std::array<std::vector<TimedBlock>, kTrackCount> lanes_;
};

inline SigningScore score_block(std::span<const Track> tracks, std::string label, Decimal duration) {
    return SigningScore::block(tracks, std::move(label), duration);
}

/// Score export: `duration <d>` then `<track> <start> <end> <label>` per block,
/// tracks in enumeration order, blocks by start time.
inline std::string export_score(const SigningScore& score) {
    std::string out = "duration " + score.duration().to_string() + "\n";
    for (Track t : kAllTracks)
        for (const auto& b : score.blocks(t)) {
            out += to_string(t);
            out += ' ';
            out += b.start.to_string();
            out += ' ';
            out += b.end.to_string();
            out += ' ';
            out += b.label;
            out += '\n';
        }
    return out;
}

}  // namespace azvd
