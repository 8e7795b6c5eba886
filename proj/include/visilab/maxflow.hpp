#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

namespace visilab {

/// Boykov-Kolmogorov augmenting-path max-flow on integer capacities, with the
/// arcs held in flat arrays (grid graphs with millions of arcs stay compact).
class MaxFlow {
public:
    using Cap = std::int64_t;

    explicit MaxFlow(int nodes) : tr_(static_cast<std::size_t>(nodes), 0) {}

    int nodes() const { return static_cast<int>(tr_.size()); }
    std::size_t arcs() const { return eu_.size() * 2; }

    void add_tweights(int i, Cap to_source, Cap to_sink) {
        Cap& t = tr_[static_cast<std::size_t>(i)];
        if (t > 0) to_source += t; else to_sink -= t;
        flow_ += std::min(to_source, to_sink);
        t = to_source - to_sink;
    }
    void add_edge(int u, int v, Cap cuv, Cap cvu) {
        if (u == v) return;
        eu_.push_back(u); ev_.push_back(v); cf_.push_back(cuv); cr_.push_back(cvu);
    }

    /// Maximum flow value (equal to the minimum cut).
    __int128 solve() {
        build();
        run();
        return flow_;
    }

    /// True when node i ends on the source side of the minimum cut
    /// (the set reachable from the source in the residual graph).
    bool source_side(int i) const {
        const auto u = static_cast<std::size_t>(i);
        return parent_[u] != none && !sink_[u];
    }

private:
    static constexpr int none = -1, terminal = -2, orphan = -3;

    std::vector<Cap> tr_;
    std::vector<int> eu_, ev_;
    std::vector<Cap> cf_, cr_;
    __int128 flow_ = 0;

    // CSR
    std::vector<std::size_t> first_;
    std::vector<int> head_;
    std::vector<std::size_t> sister_;
    std::vector<Cap> rcap_;

    std::vector<int> parent_; // arc index (as int) toward the parent, or a marker
    std::vector<std::uint8_t> sink_, active_;
    std::vector<long> ts_;
    std::vector<int> dist_;
    std::deque<int> queue_, orphans_;
    long time_ = 0;

    void build() {
        const std::size_t n = tr_.size(), m = eu_.size();
        first_.assign(n + 1, 0);
        for (std::size_t e = 0; e < m; ++e) {
            ++first_[static_cast<std::size_t>(eu_[e]) + 1];
            ++first_[static_cast<std::size_t>(ev_[e]) + 1];
        }
        for (std::size_t i = 0; i < n; ++i) first_[i + 1] += first_[i];
        if (first_[n] > static_cast<std::size_t>(std::numeric_limits<int>::max()))
            throw std::length_error("MaxFlow: too many arcs");
        std::vector<std::size_t> pos(first_.begin(), first_.end() - 1);
        head_.assign(2 * m, 0);
        sister_.assign(2 * m, 0);
        rcap_.assign(2 * m, 0);
        for (std::size_t e = 0; e < m; ++e) {
            std::size_t a = pos[static_cast<std::size_t>(eu_[e])]++, b = pos[static_cast<std::size_t>(ev_[e])]++;
            head_[a] = ev_[e]; head_[b] = eu_[e];
            sister_[a] = b; sister_[b] = a;
            rcap_[a] = cf_[e]; rcap_[b] = cr_[e];
        }
        eu_.clear(); ev_.clear(); cf_.clear(); cr_.clear();
        eu_.shrink_to_fit(); ev_.shrink_to_fit(); cf_.shrink_to_fit(); cr_.shrink_to_fit();
    }

    std::size_t tail(std::size_t a) const { return static_cast<std::size_t>(head_[sister_[a]]); }

    void set_active(int i) {
        auto u = static_cast<std::size_t>(i);
        if (!active_[u]) { active_[u] = 1; queue_.push_back(i); }
    }
    int next_active() {
        while (!queue_.empty()) {
            int i = queue_.front();
            queue_.pop_front();
            active_[static_cast<std::size_t>(i)] = 0;
            if (parent_[static_cast<std::size_t>(i)] != none) return i;
        }
        return -1;
    }
    void make_orphan(int i) {
        parent_[static_cast<std::size_t>(i)] = orphan;
        orphans_.push_front(i);
    }

    void run() {
        const std::size_t n = tr_.size();
        parent_.assign(n, none);
        sink_.assign(n, 0);
        active_.assign(n, 0);
        ts_.assign(n, 0);
        dist_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (tr_[i] == 0) continue;
            sink_[i] = tr_[i] < 0;
            parent_[i] = terminal;
            dist_[i] = 1;
            set_active(static_cast<int>(i));
        }
        int cur = -1;
        for (;;) {
            int i = cur;
            if (i >= 0) {
                auto u = static_cast<std::size_t>(i);
                if (parent_[u] == none) i = -1;
            }
            if (i < 0) {
                i = next_active();
                if (i < 0) break;
            }
            cur = -1;
            const auto u = static_cast<std::size_t>(i);
            std::size_t found = static_cast<std::size_t>(-1);
            for (std::size_t a = first_[u]; a < first_[u + 1]; ++a) {
                const bool src = !sink_[u];
                if (!(src ? rcap_[a] > 0 : rcap_[sister_[a]] > 0)) continue;
                auto j = static_cast<std::size_t>(head_[a]);
                if (parent_[j] == none) {
                    sink_[j] = sink_[u];
                    parent_[j] = static_cast<int>(sister_[a]);
                    ts_[j] = ts_[u];
                    dist_[j] = dist_[u] + 1;
                    set_active(static_cast<int>(j));
                } else if (sink_[j] != sink_[u]) {
                    found = src ? a : sister_[a];
                    break;
                } else if (ts_[j] <= ts_[u] && dist_[j] > dist_[u]) {
                    parent_[j] = static_cast<int>(sister_[a]);
                    ts_[j] = ts_[u];
                    dist_[j] = dist_[u] + 1;
                }
            }
            ++time_;
            if (found != static_cast<std::size_t>(-1)) {
                // keep i for the next round: it may have further paths
                cur = i;
                augment(found);
                adopt();
            }
        }
    }

    void augment(std::size_t mid) {
        Cap b = rcap_[mid];
        std::size_t i = tail(mid);
        for (;;) {
            int a = parent_[i];
            if (a == terminal) break;
            b = std::min(b, rcap_[sister_[static_cast<std::size_t>(a)]]);
            i = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
        }
        b = std::min(b, tr_[i]);
        i = static_cast<std::size_t>(head_[mid]);
        for (;;) {
            int a = parent_[i];
            if (a == terminal) break;
            b = std::min(b, rcap_[static_cast<std::size_t>(a)]);
            i = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
        }
        b = std::min(b, -tr_[i]);

        rcap_[sister_[mid]] += b;
        rcap_[mid] -= b;
        i = tail(mid);
        for (;;) {
            int a = parent_[i];
            if (a == terminal) break;
            auto ua = static_cast<std::size_t>(a);
            rcap_[ua] += b;
            rcap_[sister_[ua]] -= b;
            std::size_t nx = static_cast<std::size_t>(head_[ua]);
            if (rcap_[sister_[ua]] == 0) make_orphan(static_cast<int>(i));
            i = nx;
        }
        tr_[i] -= b;
        if (tr_[i] == 0) make_orphan(static_cast<int>(i));
        i = static_cast<std::size_t>(head_[mid]);
        for (;;) {
            int a = parent_[i];
            if (a == terminal) break;
            auto ua = static_cast<std::size_t>(a);
            rcap_[sister_[ua]] += b;
            rcap_[ua] -= b;
            std::size_t nx = static_cast<std::size_t>(head_[ua]);
            if (rcap_[ua] == 0) make_orphan(static_cast<int>(i));
            i = nx;
        }
        tr_[i] += b;
        if (tr_[i] == 0) make_orphan(static_cast<int>(i));
        flow_ += b;
    }

    void adopt() {
        while (!orphans_.empty()) {
            int i = orphans_.front();
            orphans_.pop_front();
            process_orphan(static_cast<std::size_t>(i));
        }
    }

    void process_orphan(std::size_t i) {
        const bool snk = sink_[i];
        const int inf = std::numeric_limits<int>::max();
        int best_d = inf;
        std::size_t best_a = static_cast<std::size_t>(-1);
        for (std::size_t a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
            bool ok = snk ? rcap_[a0] > 0 : rcap_[sister_[a0]] > 0;
            if (!ok) continue;
            auto j = static_cast<std::size_t>(head_[a0]);
            if (sink_[j] != snk || parent_[j] == none) continue;
            // distance of j to its terminal
            int d = 0;
            std::size_t j2 = j;
            for (;;) {
                if (ts_[j2] == time_) { d += dist_[j2]; break; }
                int a = parent_[j2];
                ++d;
                if (a == terminal) { ts_[j2] = time_; dist_[j2] = 1; break; }
                if (a == orphan) { d = inf; break; }
                j2 = static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]);
            }
            if (d < inf) {
                if (d < best_d) { best_a = a0; best_d = d; }
                for (j2 = j; ts_[j2] != time_; j2 = static_cast<std::size_t>(head_[static_cast<std::size_t>(parent_[j2])])) {
                    ts_[j2] = time_;
                    dist_[j2] = d--;
                }
            }
        }
        if (best_a != static_cast<std::size_t>(-1)) {
            parent_[i] = static_cast<int>(best_a);
            ts_[i] = time_;
            dist_[i] = best_d + 1;
            return;
        }
        parent_[i] = none;
        for (std::size_t a0 = first_[i]; a0 < first_[i + 1]; ++a0) {
            auto j = static_cast<std::size_t>(head_[a0]);
            if (sink_[j] != snk || parent_[j] == none) continue;
            int a = parent_[j];
            bool res = snk ? rcap_[a0] > 0 : rcap_[sister_[a0]] > 0;
            if (res) set_active(static_cast<int>(j));
            if (a != terminal && a != orphan && static_cast<std::size_t>(head_[static_cast<std::size_t>(a)]) == i)
                make_orphan(static_cast<int>(j));
        }
    }
};

} // namespace visilab
