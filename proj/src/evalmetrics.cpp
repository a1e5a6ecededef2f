#include "anystar/evalmetrics.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace anystar {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("report: bad number '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("report: bad integer '" + s + "'");
    }
    return v;
}

}  // namespace

IouMatrix instance_iou_matrix(const LabelVolume& pred, const LabelVolume& gt) {
    if (pred.dims() != gt.dims()) throw std::invalid_argument("instance_iou_matrix: dims mismatch");
    std::map<Label, std::size_t> ps, gs;
    std::unordered_map<std::uint64_t, std::size_t> inter;
    const auto& p = pred.data();
    const auto& g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i]) ++ps[p[i]];
        if (g[i]) ++gs[g[i]];
        if (p[i] && g[i]) {
            ++inter[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(p[i])) << 32) |
                    static_cast<std::uint32_t>(g[i])];
        }
    }
    IouMatrix m;
    for (const auto& [id, n] : ps) m.pred_ids.push_back(id);
    for (const auto& [id, n] : gs) m.gt_ids.push_back(id);
    m.iou.assign(m.pred_ids.size() * m.gt_ids.size(), 0.0);
    std::unordered_map<Label, int> prow, gcol;
    for (int r = 0; r < m.rows(); ++r) prow[m.pred_ids[std::size_t(r)]] = r;
    for (int c = 0; c < m.cols(); ++c) gcol[m.gt_ids[std::size_t(c)]] = c;
    for (const auto& [key, n] : inter) {
        const Label a = static_cast<Label>(key >> 32);
        const Label b = static_cast<Label>(key & 0xffffffffu);
        const double uni = double(ps[a]) + double(gs[b]) - double(n);
        m.iou[std::size_t(prow[a]) * m.gt_ids.size() + std::size_t(gcol[b])] = double(n) / uni;
    }
    return m;
}

MatchCounts match_at_threshold(const IouMatrix& m, double tau) {
    const int R = m.rows(), C = m.cols();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            if (m.at(r, c) > tau) adj[std::size_t(r)].push_back(c);
        }
    // augmenting paths (Kuhn); the objective is the pair count
    std::vector<int> owner(static_cast<std::size_t>(C), -1);
    std::vector<int> seen(static_cast<std::size_t>(C), -1);
    auto augment = [&](auto&& self, int r, int stamp) -> bool {
        for (int c : adj[std::size_t(r)]) {
            if (seen[std::size_t(c)] == stamp) continue;
            seen[std::size_t(c)] = stamp;
            if (owner[std::size_t(c)] < 0 || self(self, owner[std::size_t(c)], stamp)) {
                owner[std::size_t(c)] = r;
                return true;
            }
        }
        return false;
    };
    int tp = 0;
    for (int r = 0; r < R; ++r) tp += augment(augment, r, r);
    return MatchCounts{tp, R - tp, C - tp};
}

std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 1; i <= 9; ++i) t.push_back(i / 10.0);
    return t;
}

MatchReport score_curve(const IouMatrix& m, const std::vector<double>& thresholds) {
    MatchReport rep;
    rep.n_pred = m.rows();
    rep.n_gt = m.cols();
    for (double tau : thresholds) {
        const MatchCounts k = match_at_threshold(m, tau);
        ThresholdScore s;
        s.tau = tau;
        s.tp = k.tp;
        s.fp = k.fp;
        s.fn = k.fn;
        s.accuracy = ratio(k.tp, double(k.tp + k.fp + k.fn));
        s.precision = ratio(k.tp, double(k.tp + k.fp));
        s.recall = ratio(k.tp, double(k.tp + k.fn));
        s.f1 = ratio(2.0 * k.tp, double(2 * k.tp + k.fp + k.fn));
        rep.per_threshold.push_back(s);
    }
    if (!thresholds.empty()) {
        double sum = 0.0;
        for (const auto& s : rep.per_threshold) sum += s.accuracy;
        rep.mean_accuracy = sum / double(thresholds.size());
        rep.mean_ap = rep.mean_accuracy;
    }
    return rep;
}

MatchReport score_curve(const LabelVolume& pred, const LabelVolume& gt, const std::vector<double>& thresholds) {
    return score_curve(instance_iou_matrix(pred, gt), thresholds);
}

void write_report(std::ostream& out, const MatchReport& r) {
    out << "# instance matching, IoU > tau, one-to-one\n";
    out << "# accuracy = tp / (tp + fp + fn) (not voxel accuracy); AP at tau uses the same ratio\n";
    out << "# n_pred\t" << r.n_pred << "\n";
    out << "# n_gt\t" << r.n_gt << "\n";
    out << "# mean_accuracy\t" << fmt(r.mean_accuracy) << "\n";
    out << "# mAP\t" << fmt(r.mean_ap) << "\n";
    out << "tau\ttp\tfp\tfn\taccuracy\tprecision\trecall\tf1\n";
    for (const auto& s : r.per_threshold) {
        out << fmt(s.tau) << '\t' << s.tp << '\t' << s.fp << '\t' << s.fn << '\t' << fmt(s.accuracy) << '\t'
            << fmt(s.precision) << '\t' << fmt(s.recall) << '\t' << fmt(s.f1) << '\n';
    }
}

MatchReport read_report(std::istream& in) {
    MatchReport r;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
        if (line[0] == '#') {
            if (f.size() != 2) continue;
            if (f[0] == "# n_pred") r.n_pred = parse_int(f[1]);
            else if (f[0] == "# n_gt") r.n_gt = parse_int(f[1]);
            else if (f[0] == "# mean_accuracy") r.mean_accuracy = parse_double(f[1]);
            else if (f[0] == "# mAP") r.mean_ap = parse_double(f[1]);
            continue;
        }
        if (!header) {
            if (f.empty() || f[0] != "tau") throw std::runtime_error("report: missing column header");
            header = true;
            continue;
        }
        if (f.size() != 8) throw std::runtime_error("report: expected 8 columns, got " + std::to_string(f.size()));
        ThresholdScore s;
        s.tau = parse_double(f[0]);
        s.tp = parse_int(f[1]);
        s.fp = parse_int(f[2]);
        s.fn = parse_int(f[3]);
        s.accuracy = parse_double(f[4]);
        s.precision = parse_double(f[5]);
        s.recall = parse_double(f[6]);
        s.f1 = parse_double(f[7]);
        r.per_threshold.push_back(s);
    }
    if (!header) throw std::runtime_error("report: missing column header");
    return r;
}

}  // namespace anystar
