#pragma once

#include <string>
#include <vector>

#include "sdof/mot_io.hpp"

namespace sdof::metrics {

struct EvalOptions {
    double iou_gate = 0.5;
    /// Only ground-truth rows with considered = 1 and a class listed here are
    /// scored. An empty list accepts every class.
    bool require_considered = true;
    std::vector<int> classes{1};
    double mostly_tracked = 0.8;  // MT: tracked ratio strictly above this
    double mostly_lost = 0.2;     // ML: tracked ratio strictly below this
};

struct EvalReport {
    long num_gt = 0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    long frag = 0;
    long num_trajectories = 0;
    long mt = 0;
    long ml = 0;
    double recall = 0.0;
    double precision = 0.0;
    double mota = 0.0;
};

/// CLEAR-MOT evaluation. Correspondences from the previous frame are kept
/// while their IoU stays at or above the gate; the remaining pairs are solved
/// with the Hungarian algorithm on 1 - IoU. Throws Errc::EmptyGroundTruth
/// when no ground-truth row survives filtering.
EvalReport evaluate(const std::vector<mot_io::GtRow>& gt, const std::vector<mot_io::ResultRow>& results,
                    const EvalOptions& options = {});

/// Text table in the column order MT, ML, Rcll, Prcn, IDsw, Frag, MOTA.
std::string format_report(const EvalReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace sdof::metrics
