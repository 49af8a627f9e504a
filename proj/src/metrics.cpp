#include "sdof/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "sdof/association.hpp"
#include "sdof/error.hpp"
#include "sdof/tracking.hpp"

namespace sdof::metrics {

namespace {

struct TrajectoryStats {
    long present = 0;
    long tracked = 0;
    bool ever_tracked = false;
    bool tracked_last_presence = false;
    int last_hyp = -1;
};

}  // namespace

EvalReport evaluate(const std::vector<mot_io::GtRow>& gt, const std::vector<mot_io::ResultRow>& results,
                    const EvalOptions& options) {
    if (!(options.iou_gate > 0.0 && options.iou_gate <= 1.0))
        throw Error(Errc::InvalidArgument, "iou gate must lie in (0, 1]");

    std::map<int, std::vector<const mot_io::GtRow*>> gt_by_frame;
    for (const auto& row : gt) {
        if (options.require_considered && row.considered != 1) continue;
        if (!options.classes.empty() &&
            std::find(options.classes.begin(), options.classes.end(), row.cls) == options.classes.end())
            continue;
        gt_by_frame[row.frame].push_back(&row);
    }
    if (gt_by_frame.empty()) throw Error(Errc::EmptyGroundTruth, "no ground-truth rows to evaluate");

    std::map<int, std::vector<const mot_io::ResultRow*>> res_by_frame;
    for (const auto& row : results) res_by_frame[row.frame].push_back(&row);

    std::set<int> frames;
    for (const auto& [f, rows] : gt_by_frame) frames.insert(f);
    for (const auto& [f, rows] : res_by_frame) frames.insert(f);

    EvalReport report;
    std::unordered_map<int, TrajectoryStats> stats;
    std::unordered_map<int, int> prev_match;  // gt id -> hyp id, previous frame only
    static const std::vector<const mot_io::GtRow*> kNoGt;
    static const std::vector<const mot_io::ResultRow*> kNoRes;

    for (int frame : frames) {
        const auto git = gt_by_frame.find(frame);
        const auto rit = res_by_frame.find(frame);
        const auto& gts = git == gt_by_frame.end() ? kNoGt : git->second;
        const auto& hyps = rit == res_by_frame.end() ? kNoRes : rit->second;

        std::vector<int> gt_to_hyp(gts.size(), -1);  // index into hyps
        std::vector<char> hyp_used(hyps.size(), 0);

        for (std::size_t g = 0; g < gts.size(); ++g) {
            const auto pm = prev_match.find(gts[g]->id);
            if (pm == prev_match.end()) continue;
            for (std::size_t h = 0; h < hyps.size(); ++h) {
                if (hyp_used[h] || hyps[h]->id != pm->second) continue;
                if (tracking::iou(gts[g]->bbox, hyps[h]->bbox) >= options.iou_gate) {
                    gt_to_hyp[g] = static_cast<int>(h);
                    hyp_used[h] = 1;
                }
                break;
            }
        }

        std::vector<std::size_t> free_gt, free_hyp;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (gt_to_hyp[g] < 0) free_gt.push_back(g);
        for (std::size_t h = 0; h < hyps.size(); ++h)
            if (!hyp_used[h]) free_hyp.push_back(h);
        if (!free_gt.empty() && !free_hyp.empty()) {
            // Pairs below the gate get a cost larger than any full set of
            // admissible pairs, so the solver maximizes admissible matches first.
            const double blocked = static_cast<double>(std::min(free_gt.size(), free_hyp.size())) + 1.0;
            association::CostMatrix costs(free_gt.size(), free_hyp.size());
            std::vector<double> ious(free_gt.size() * free_hyp.size());
            for (std::size_t a = 0; a < free_gt.size(); ++a) {
                for (std::size_t b = 0; b < free_hyp.size(); ++b) {
                    const double v = tracking::iou(gts[free_gt[a]]->bbox, hyps[free_hyp[b]]->bbox);
                    ious[a * free_hyp.size() + b] = v;
                    costs(a, b) = v >= options.iou_gate ? 1.0 - v : blocked;
                }
            }
            for (auto [a, b] : association::hungarian(costs).matches) {
                if (ious[a * free_hyp.size() + b] < options.iou_gate) continue;
                gt_to_hyp[free_gt[a]] = static_cast<int>(free_hyp[b]);
                hyp_used[free_hyp[b]] = 1;
            }
        }

        prev_match.clear();
        long matched = 0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            TrajectoryStats& s = stats[gts[g]->id];
            s.present += 1;
            if (gt_to_hyp[g] < 0) {
                s.tracked_last_presence = false;
                continue;
            }
            const int hyp_id = hyps[static_cast<std::size_t>(gt_to_hyp[g])]->id;
            ++matched;
            s.tracked += 1;
            if (s.last_hyp >= 0 && s.last_hyp != hyp_id) ++report.idsw;
            if (s.ever_tracked && !s.tracked_last_presence) ++report.frag;
            s.last_hyp = hyp_id;
            s.ever_tracked = true;
            s.tracked_last_presence = true;
            prev_match[gts[g]->id] = hyp_id;
        }
        report.num_gt += static_cast<long>(gts.size());
        report.tp += matched;
        report.fn += static_cast<long>(gts.size()) - matched;
        report.fp += static_cast<long>(hyps.size()) - matched;
    }

    report.num_trajectories = static_cast<long>(stats.size());
    for (const auto& [id, s] : stats) {
        const double ratio = static_cast<double>(s.tracked) / static_cast<double>(s.present);
        if (ratio > options.mostly_tracked) ++report.mt;
        if (ratio < options.mostly_lost) ++report.ml;
    }
    report.recall = static_cast<double>(report.tp) / static_cast<double>(report.num_gt);
    report.precision =
        report.tp + report.fp > 0 ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp) : 0.0;
    report.mota = 1.0 - static_cast<double>(report.fn + report.fp + report.idsw) / static_cast<double>(report.num_gt);
    return report;
}

std::string format_report(const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%6s %6s %7s %7s %6s %6s %7s\n%6ld %6ld %7.1f %7.1f %6ld %6ld %7.3f\n"
                  "num_gt=%ld tp=%ld fp=%ld fn=%ld trajectories=%ld\n",
                  "MT", "ML", "Rcll", "Prcn", "IDsw", "Frag", "MOTA", r.mt, r.ml, 100.0 * r.recall,
                  100.0 * r.precision, r.idsw, r.frag, r.mota, r.num_gt, r.tp, r.fp, r.fn, r.num_trajectories);
    return buf;
}

std::string report_csv_header() { return "MT,ML,Rcll,Prcn,IDsw,Frag,MOTA,num_gt,tp,fp,fn,trajectories\n"; }

std::string report_csv_row(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%ld,%ld,%.6f,%.6f,%ld,%ld,%.6f,%ld,%ld,%ld,%ld,%ld\n", r.mt, r.ml, r.recall,
                  r.precision, r.idsw, r.frag, r.mota, r.num_gt, r.tp, r.fp, r.fn, r.num_trajectories);
    return buf;
}

}  // namespace sdof::metrics
