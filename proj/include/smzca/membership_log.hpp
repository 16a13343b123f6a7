#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace smzca {

/// One stay inside one cluster. t_leave_ms == kOpen while the vehicle is
/// still a member.
struct MembershipInterval {
    std::string head_id;
    std::int64_t t_join_ms = 0;
    std::int64_t t_leave_ms = kOpen;

    static constexpr std::int64_t kOpen = -1;

    std::int64_t duration_ms() const { return t_leave_ms - t_join_ms; }
};

/// Per-vehicle attendance: one presence span in the study area plus the
/// cluster memberships collected during it. A vehicle that leaves and later
/// re-enters the area gets a fresh attendance entry.
struct VehicleAttendance {
    std::string vehicle_id;
    std::int64_t t_in_ms = 0;
    std::int64_t t_out_ms = MembershipInterval::kOpen;
    std::vector<MembershipInterval> intervals;

    int gamma() const { return static_cast<int>(intervals.size()); }
    std::int64_t attendance_ms() const { return t_out_ms - t_in_ms; }
    std::int64_t time_in_clusters_ms() const {
        std::int64_t sum = 0;
        for (const auto& iv : intervals) sum += iv.duration_ms();
        return sum;
    }
};

/// Join/leave history for every vehicle seen by a run.
class MembershipLog {
  public:
    void enter(const std::string& id, std::int64_t t_ms) {
        if (active_.count(id)) throw std::logic_error("MembershipLog: '" + id + "' already present");
        active_[id] = entries_.size();
        entries_.push_back({id, t_ms, MembershipInterval::kOpen, {}});
    }

    void join(const std::string& id, const std::string& head, std::int64_t t_ms) {
        auto& e = entry(id);
        if (!e.intervals.empty() && e.intervals.back().t_leave_ms == MembershipInterval::kOpen) {
            throw std::logic_error("MembershipLog: '" + id + "' joined while still a member");
        }
        e.intervals.push_back({head, t_ms, MembershipInterval::kOpen});
    }

    void leave(const std::string& id, std::int64_t t_ms) {
        auto& e = entry(id);
        if (e.intervals.empty() || e.intervals.back().t_leave_ms != MembershipInterval::kOpen) {
            throw std::logic_error("MembershipLog: '" + id + "' left without membership");
        }
        e.intervals.back().t_leave_ms = t_ms;
    }

    /// Ends the presence span, closing any open membership at the same time.
    void exit(const std::string& id, std::int64_t t_ms) {
        auto& e = entry(id);
        if (!e.intervals.empty() && e.intervals.back().t_leave_ms == MembershipInterval::kOpen) {
            e.intervals.back().t_leave_ms = t_ms;
        }
        e.t_out_ms = t_ms;
        active_.erase(id);
    }

    /// Closes every still-open span and membership at run end.
    void close_all(std::int64_t t_ms) {
        for (auto it = active_.begin(); it != active_.end();) {
            auto& e = entries_[it->second];
            if (!e.intervals.empty() && e.intervals.back().t_leave_ms == MembershipInterval::kOpen) {
                e.intervals.back().t_leave_ms = t_ms;
            }
            e.t_out_ms = t_ms;
            it = active_.erase(it);
        }
    }

    bool is_member(const std::string& id) const {
        auto it = active_.find(id);
        if (it == active_.end()) return false;
        const auto& e = entries_[it->second];
        return !e.intervals.empty() && e.intervals.back().t_leave_ms == MembershipInterval::kOpen;
    }

    const std::vector<VehicleAttendance>& entries() const { return entries_; }

    static MembershipLog from_entries(std::vector<VehicleAttendance> entries) {
        MembershipLog log;
        log.entries_ = std::move(entries);
        return log;
    }

    /// Checks interval ordering, disjointness, and containment in the span.
    bool valid() const {
        for (const auto& e : entries_) {
            if (e.t_out_ms != MembershipInterval::kOpen && e.t_out_ms < e.t_in_ms) return false;
            std::int64_t prev_end = e.t_in_ms;
            for (const auto& iv : e.intervals) {
                if (iv.t_join_ms < prev_end) return false;
                if (iv.t_leave_ms == MembershipInterval::kOpen) {
                    if (&iv != &e.intervals.back()) return false;
                    continue;
                }
                if (iv.t_leave_ms < iv.t_join_ms) return false;
                if (e.t_out_ms != MembershipInterval::kOpen && iv.t_leave_ms > e.t_out_ms) {
                    return false;
                }
                prev_end = iv.t_leave_ms;
            }
        }
        return true;
    }

  private:
    VehicleAttendance& entry(const std::string& id) {
        auto it = active_.find(id);
        if (it == active_.end()) throw std::logic_error("MembershipLog: unknown id '" + id + "'");
        return entries_[it->second];
    }

    std::vector<VehicleAttendance> entries_;
    std::unordered_map<std::string, std::size_t> active_;
};

}  // namespace smzca
