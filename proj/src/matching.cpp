#include "evolvekit/diff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "evolvekit/error.hpp"

namespace evolvekit::diff {

void MatchConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::TypeError, "match config: " + what); };
    if (!(alpha >= 0.0 && alpha <= 1.0)) bad("alpha must lie in [0,1]");
    if (!(theta >= 0.0 && theta <= 1.0)) bad("theta must lie in [0,1]");
    if (!(epsilon > 0.0)) bad("epsilon must be positive");
    if (maxIter < 0) bad("maxIter must be a natural number");
}

std::optional<std::string> Matching::right_of(const std::string& leftId) const {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), leftId,
                               [](const MatchPair& p, const std::string& id) { return p.left < id; });
    if (it != pairs.end() && it->left == leftId) return it->right;
    return std::nullopt;
}

std::optional<std::string> Matching::left_of(const std::string& rightId) const {
    for (const auto& p : pairs)
        if (p.right == rightId) return p.left;
    return std::nullopt;
}

double string_similarity(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
            diag = up;
        }
    }
    return 1.0 - static_cast<double>(row[b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

namespace {

double value_similarity(const Literal& a, const Literal& b) {
    if (auto *sa = std::get_if<std::string>(&a), *sb = std::get_if<std::string>(&b); sa && sb)
        return string_similarity(*sa, *sb);
    auto num = [](const Literal& v) -> std::optional<double> {
        if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        if (auto* d = std::get_if<double>(&v)) return *d;
        return std::nullopt;
    };
    if (auto na = num(a), nb = num(b); na && nb) return *na == *nb ? 1.0 : 0.0;
    if (auto *ba = std::get_if<bool>(&a), *bb = std::get_if<bool>(&b); ba && bb)
        return *ba == *bb ? 1.0 : 0.0;
    return 0.0;
}

}  // namespace

double attribute_similarity(const MObject& a, const MObject& b) {
    std::set<std::string> names;
    for (const auto& [k, v] : a.attributes) names.insert(k);
    for (const auto& [k, v] : b.attributes) names.insert(k);
    if (names.empty()) return 1.0;
    double sum = 0.0;
    for (const auto& n : names) {
        auto ia = a.attributes.find(n);
        auto ib = b.attributes.find(n);
        if (ia != a.attributes.end() && ib != b.attributes.end()) sum += value_similarity(ia->second, ib->second);
    }
    return sum / static_cast<double>(names.size());
}

namespace {

/// Per-object neighbourhood, grouped so that only like neighbours are paired:
/// the parent, children per role, and link ends per (association, direction).
struct Node {
    std::string id;
    std::string className;
    std::map<std::string, std::vector<int>> groups;
};

std::vector<Node> index_nodes(const Model& m, std::map<std::string, int>& idx) {
    std::vector<Node> nodes;
    for (const auto& [id, obj] : m.objects) {
        idx[id] = static_cast<int>(nodes.size());
        nodes.push_back(Node{id, obj.className, {}});
    }
    for (const auto& [id, obj] : m.objects) {
        int self = idx[id];
        for (const auto& [role, kids] : obj.children) {
            for (const auto& kid : kids) {
                nodes[self].groups["child:" + role].push_back(idx[kid]);
                nodes[idx[kid]].groups["parent"].push_back(self);
            }
        }
    }
    for (const auto& [id, link] : m.links) {
        int s = idx[link.src], d = idx[link.dst];
        nodes[s].groups["out:" + link.association].push_back(d);
        nodes[d].groups["in:" + link.association].push_back(s);
    }
    return nodes;
}

class Matcher {
public:
    Matcher(const Model& left, const Model& right, const MatchConfig& cfg) : cfg_(cfg) {
        L_ = index_nodes(left, lidx_);
        R_ = index_nodes(right, ridx_);
        // Candidate pairs are restricted to identical classes.
        std::map<std::string, std::vector<int>> rightByClass;
        for (int j = 0; j < static_cast<int>(R_.size()); ++j) rightByClass[R_[j].className].push_back(j);
        rowStart_.resize(L_.size() + 1);
        for (int i = 0; i < static_cast<int>(L_.size()); ++i) {
            rowStart_[i] = cols_.size();
            auto it = rightByClass.find(L_[i].className);
            if (it == rightByClass.end()) continue;
            for (int j : it->second) {
                cols_.push_back(j);
                attr_.push_back(attribute_similarity(*left.find(L_[i].id), *right.find(R_[j].id)));
            }
        }
        rowStart_[L_.size()] = cols_.size();
        score_ = attr_;
    }

    int run() {
        int iter = 0;
        std::vector<double> next(score_.size());
        while (iter < cfg_.maxIter) {
            double maxDelta = 0.0;
            for (int i = 0; i < static_cast<int>(L_.size()); ++i) {
                for (std::size_t k = rowStart_[i]; k < rowStart_[i + 1]; ++k) {
                    double s = (1.0 - cfg_.alpha) * attr_[k] + cfg_.alpha * neighbour_similarity(i, cols_[k], k);
                    next[k] = std::clamp(s, 0.0, 1.0);
                    maxDelta = std::max(maxDelta, std::abs(next[k] - score_[k]));
                }
            }
            score_.swap(next);
            ++iter;
            if (maxDelta < cfg_.epsilon) break;
        }
        return iter;
    }

    Matching select(int iterations) const {
        struct Cand {
            double score;
            const std::string* l;
            const std::string* r;
            int li, rj;
        };
        std::vector<Cand> cands;
        for (int i = 0; i < static_cast<int>(L_.size()); ++i)
            for (std::size_t k = rowStart_[i]; k < rowStart_[i + 1]; ++k)
                if (score_[k] >= cfg_.theta) cands.push_back({score_[k], &L_[i].id, &R_[cols_[k]].id, i, cols_[k]});
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.score != b.score) return a.score > b.score;
            return std::tie(*a.l, *a.r) < std::tie(*b.l, *b.r);
        });
        std::vector<char> lUsed(L_.size()), rUsed(R_.size());
        Matching m;
        m.config = cfg_;
        m.iterations = iterations;
        for (const auto& c : cands) {
            if (lUsed[c.li] || rUsed[c.rj]) continue;
            lUsed[c.li] = rUsed[c.rj] = 1;
            m.pairs.push_back({*c.l, *c.r, c.score});
        }
        std::sort(m.pairs.begin(), m.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.left < b.left; });
        return m;
    }

private:
    double current(int i, int j) const {
        auto first = cols_.begin() + static_cast<std::ptrdiff_t>(rowStart_[i]);
        auto last = cols_.begin() + static_cast<std::ptrdiff_t>(rowStart_[i + 1]);
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return score_[static_cast<std::size_t>(it - cols_.begin())];
    }

    /// Greedy one-to-one pairing of two neighbour lists, normalised by the larger.
    double pairing(const std::vector<int>& a, const std::vector<int>& b) const {
        struct P {
            double s;
            int x, y;
        };
        std::vector<P> ps;
        for (int x : a)
            for (int y : b)
                if (double s = current(x, y); s > 0.0) ps.push_back({s, x, y});
        std::sort(ps.begin(), ps.end(), [](const P& p, const P& q) {
            if (p.s != q.s) return p.s > q.s;
            return std::tie(p.x, p.y) < std::tie(q.x, q.y);
        });
        std::set<int> ux, uy;
        double sum = 0.0;
        for (const auto& p : ps) {
            if (ux.count(p.x) || uy.count(p.y)) continue;
            ux.insert(p.x);
            uy.insert(p.y);
            sum += p.s;
        }
        return sum / static_cast<double>(std::max(a.size(), b.size()));
    }

    double neighbour_similarity(int i, int j, std::size_t k) const {
        const auto& ga = L_[i].groups;
        const auto& gb = R_[j].groups;
        if (ga.empty() && gb.empty()) return score_[k];
        double sum = 0.0;
        int groups = 0;
        auto ia = ga.begin();
        auto ib = gb.begin();
        static const std::vector<int> none;
        while (ia != ga.end() || ib != gb.end()) {
            const std::vector<int>* na = &none;
            const std::vector<int>* nb = &none;
            if (ib == gb.end() || (ia != ga.end() && ia->first < ib->first)) {
                na = &ia->second;
                ++ia;
            } else if (ia == ga.end() || ib->first < ia->first) {
                nb = &ib->second;
                ++ib;
            } else {
                na = &ia->second;
                nb = &ib->second;
                ++ia;
                ++ib;
            }
            ++groups;
            if (!na->empty() && !nb->empty()) sum += pairing(*na, *nb);
        }
        return sum / groups;
    }

    MatchConfig cfg_;
    std::vector<Node> L_, R_;
    std::map<std::string, int> lidx_, ridx_;
    // Sparse same-class similarity matrix, rows are left objects (CSR layout).
    std::vector<std::size_t> rowStart_;
    std::vector<int> cols_;
    std::vector<double> attr_, score_;
};

}  // namespace

Matching match_models(const Model& left, const Model& right, const MatchConfig& cfg) {
    cfg.validate();
    if (left.metamodelName != right.metamodelName)
        throw Error(ErrorCode::MetamodelMismatch, "left model is a '" + left.metamodelName +
                                                      "' model, right model is a '" + right.metamodelName + "' model");
    Matcher m(left, right, cfg);
    int iterations = m.run();
    return m.select(iterations);
}

Matching match_by_id(const Model& left, const Model& right) {
    Matching m;
    for (const auto& [id, obj] : left.objects) {
        const MObject* other = right.find(id);
        if (other && other->className == obj.className) m.pairs.push_back({id, id, 1.0});
    }
    return m;
}

}  // namespace evolvekit::diff
