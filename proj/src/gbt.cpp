#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ratedml/error.hpp"
#include "ratedml/learners.hpp"
#include "ratedml/rng.hpp"

namespace ratedml {

void HyperParams::validate() const {
    if (n_trees < 0) fail(ErrorCode::InvalidArgument, "n_trees must be >= 0");
    if (max_depth < 0) fail(ErrorCode::InvalidArgument, "max_depth must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail(ErrorCode::InvalidArgument, "learning_rate must lie in (0, 1]");
    if (min_samples_leaf < 1) fail(ErrorCode::InvalidArgument, "min_samples_leaf must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0)) fail(ErrorCode::InvalidArgument, "subsample must lie in (0, 1]");
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> depth(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.is_leaf()) continue;
        depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
        depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
        best = std::max(best, depth[i] + 1);
    }
    return best;
}

namespace {

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

/// Midpoint of two adjacent distinct values, never rounding onto `hi`.
double midpoint(double lo, double hi) {
    double t = lo + (hi - lo) * 0.5;
    if (!(t < hi)) t = lo;
    return t;
}

struct NodeStats {
    std::size_t count = 0;
    double sum = 0.0;
};

double split_gain(double sum_l, std::size_t n_l, const NodeStats& total) {
    const double sum_r = total.sum - sum_l;
    const auto n_r = total.count - n_l;
    return sum_l * sum_l / static_cast<double>(n_l) + sum_r * sum_r / static_cast<double>(n_r) -
           total.sum * total.sum / static_cast<double>(total.count);
}

/// Scans rows in ascending (value, row) order, keeping the first best split.
template <typename Visit>
Split scan_feature(std::size_t count_hint, const NodeStats& total, int min_leaf, int feature, Visit&& visit) {
    (void)count_hint;
    Split best;
    best.feature = feature;
    std::size_t n_l = 0;
    double sum_l = 0.0;
    double last = 0.0;
    const auto leaf = static_cast<std::size_t>(min_leaf);
    visit([&](double value, double resid) {
        if (n_l >= leaf && value > last && total.count - n_l >= leaf) {
            const double g = split_gain(sum_l, n_l, total);
            if (g > best.gain) {
                best.gain = g;
                best.threshold = midpoint(last, value);
            }
        }
        ++n_l;
        sum_l += resid;
        last = value;
    });
    return best;
}

std::vector<std::vector<int>> presort(const Matrix& x) {
    std::vector<std::vector<int>> order(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        auto& o = order[static_cast<std::size_t>(f)];
        o.resize(static_cast<std::size_t>(x.rows()));
        std::iota(o.begin(), o.end(), 0);
        std::sort(o.begin(), o.end(), [&](int a, int b) {
            const double va = x(a, f), vb = x(b, f);
            return va < vb || (va == vb && a < b);
        });
    }
    return order;
}

/// Level-wise builder: one pass per feature per depth over the pre-sorted
/// order, accumulating prefix statistics for every open node at once.
RegressionTree build_levelwise(const Matrix& x, const std::vector<std::vector<int>>& sorted, const std::vector<double>& resid,
                               const std::vector<char>& in_sample, const HyperParams& p, Exec exec) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto n_features = static_cast<int>(x.cols());
    const auto leaf = static_cast<std::size_t>(p.min_samples_leaf);

    RegressionTree tree;
    std::vector<NodeStats> stats;
    std::vector<int> node_of(n, -1);
    tree.nodes.emplace_back();
    stats.emplace_back();
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_sample[i]) continue;
        node_of[i] = 0;
        stats[0].count += 1;
        stats[0].sum += resid[i];
    }

    std::vector<int> frontier{0};
    for (int depth = 0; depth < p.max_depth && !frontier.empty(); ++depth) {
        std::vector<int> slot(tree.nodes.size(), -1);
        std::vector<int> open;
        for (int nd : frontier) {
            if (stats[static_cast<std::size_t>(nd)].count >= 2 * leaf) {
                slot[static_cast<std::size_t>(nd)] = static_cast<int>(open.size());
                open.push_back(nd);
            }
        }
        if (open.empty()) break;
        const std::size_t n_open = open.size();

        std::vector<std::vector<Split>> per_feature(static_cast<std::size_t>(n_features), std::vector<Split>(n_open));
        auto search = [&](int f) {
            std::vector<std::size_t> n_l(n_open, 0);
            std::vector<double> sum_l(n_open, 0.0);
            std::vector<double> last(n_open, 0.0);
            auto& best = per_feature[static_cast<std::size_t>(f)];
            for (std::size_t s = 0; s < n_open; ++s) best[s].feature = f;
            for (int row : sorted[static_cast<std::size_t>(f)]) {
                const int nd = node_of[static_cast<std::size_t>(row)];
                if (nd < 0) continue;
                const int s = slot[static_cast<std::size_t>(nd)];
                if (s < 0) continue;
                const auto si = static_cast<std::size_t>(s);
                const auto& total = stats[static_cast<std::size_t>(nd)];
                const double value = x(row, f);
                if (n_l[si] >= leaf && value > last[si] && total.count - n_l[si] >= leaf) {
                    const double g = split_gain(sum_l[si], n_l[si], total);
                    if (g > best[si].gain) {
                        best[si].gain = g;
                        best[si].threshold = midpoint(last[si], value);
                    }
                }
                ++n_l[si];
                sum_l[si] += resid[static_cast<std::size_t>(row)];
                last[si] = value;
            }
        };
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
            for (int f = 0; f < n_features; ++f) search(f);
        } else {
            for (int f = 0; f < n_features; ++f) search(f);
        }

        std::vector<int> next;
        std::vector<char> was_split(tree.nodes.size(), 0);
        for (std::size_t s = 0; s < n_open; ++s) {
            Split best;
            for (int f = 0; f < n_features; ++f) {
                const auto& c = per_feature[static_cast<std::size_t>(f)][s];
                if (c.gain > best.gain) best = c;
            }
            if (best.feature < 0) continue;
            const int nd = open[s];
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            stats.emplace_back();
            stats.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(nd)];
            node.feature = best.feature;
            node.threshold = best.threshold;
            node.left = left;
            node.right = left + 1;
            was_split[static_cast<std::size_t>(nd)] = 1;
            next.push_back(left);
            next.push_back(left + 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int nd = node_of[i];
            if (nd < 0 || static_cast<std::size_t>(nd) >= was_split.size() || !was_split[static_cast<std::size_t>(nd)]) continue;
            const auto& node = tree.nodes[static_cast<std::size_t>(nd)];
            const int child = x(static_cast<Eigen::Index>(i), node.feature) <= node.threshold ? node.left : node.right;
            node_of[i] = child;
            stats[static_cast<std::size_t>(child)].count += 1;
            stats[static_cast<std::size_t>(child)].sum += resid[i];
        }
        frontier = std::move(next);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].is_leaf() && stats[i].count > 0) tree.nodes[i].value = stats[i].sum / static_cast<double>(stats[i].count);
    }
    return tree;
}

/// Reference builder: breadth-first, each node sorts its own rows per feature.
RegressionTree build_reference(const Matrix& x, const std::vector<double>& resid, const std::vector<char>& in_sample,
                               const HyperParams& p) {
    struct Pending {
        int node;
        int depth;
        std::vector<int> rows;  // ascending row index
    };
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::deque<Pending> queue;
    {
        Pending root{0, 0, {}};
        for (std::size_t i = 0; i < in_sample.size(); ++i) {
            if (in_sample[i]) root.rows.push_back(static_cast<int>(i));
        }
        queue.push_back(std::move(root));
    }
    const auto leaf = static_cast<std::size_t>(p.min_samples_leaf);

    while (!queue.empty()) {
        Pending cur = std::move(queue.front());
        queue.pop_front();
        NodeStats total;
        for (int r : cur.rows) {
            total.count += 1;
            total.sum += resid[static_cast<std::size_t>(r)];
        }
        auto& node_value = tree.nodes[static_cast<std::size_t>(cur.node)].value;
        node_value = total.count ? total.sum / static_cast<double>(total.count) : 0.0;
        if (cur.depth >= p.max_depth || total.count < 2 * leaf) continue;

        Split best;
        for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
            std::vector<int> order = cur.rows;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = x(a, f), vb = x(b, f);
                return va < vb || (va == vb && a < b);
            });
            Split cand = scan_feature(order.size(), total, p.min_samples_leaf, f, [&](auto&& step) {
                for (int r : order) step(x(r, f), resid[static_cast<std::size_t>(r)]);
            });
            if (cand.gain > best.gain) best = cand;
        }
        if (best.feature < 0) continue;

        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[static_cast<std::size_t>(cur.node)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = left + 1;
        node.value = 0.0;
        Pending l{left, cur.depth + 1, {}};
        Pending r{left + 1, cur.depth + 1, {}};
        for (int row : cur.rows) {
            (x(row, best.feature) <= best.threshold ? l.rows : r.rows).push_back(row);
        }
        queue.push_back(std::move(l));
        queue.push_back(std::move(r));
    }
    return tree;
}

void check_fit_inputs(const Matrix& x, const Vector& y, const HyperParams& params) {
    params.validate();
    if (x.rows() != y.size()) fail(ErrorCode::LengthMismatch, "X rows and y length differ");
    if (x.rows() < 2 * static_cast<Eigen::Index>(params.min_samples_leaf)) {
        fail(ErrorCode::TooFewRows, "boosting needs at least 2 * min_samples_leaf rows");
    }
}

void add_tree(const RegressionTree& tree, const Matrix& x, double lr, Vector& f, Exec exec) {
    const auto n = x.rows();
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) f(i) += lr * tree.predict(x.row(i));
    } else {
        for (Eigen::Index i = 0; i < n; ++i) f(i) += lr * tree.predict(x.row(i));
    }
}

}  // namespace

GbtModel gbt_fit(const Matrix& x, const Vector& y, const HyperParams& params, std::uint64_t seed, Exec exec,
                 Vector* training_predictions) {
    check_fit_inputs(x, y, params);
    const auto n = static_cast<std::size_t>(x.rows());

    GbtModel model;
    model.params = params;
    model.learning_rate = params.learning_rate;
    model.n_features = static_cast<int>(x.cols());
    model.base_score = y.mean();
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));

    Vector f = Vector::Constant(x.rows(), model.base_score);
    const auto sorted = exec != Exec::Reference ? presort(x) : std::vector<std::vector<int>>{};
    std::vector<double> resid(n);
    std::vector<char> in_sample(n, 1);
    const auto sample_size = std::max<std::size_t>(2 * static_cast<std::size_t>(params.min_samples_leaf),
                                                   static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));
    std::vector<std::size_t> perm;

    for (int m = 0; m < params.n_trees; ++m) {
        for (std::size_t i = 0; i < n; ++i) resid[i] = y(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(i));
        if (sample_size < n) {
            perm.resize(n);
            std::iota(perm.begin(), perm.end(), 0);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
            rng.shuffle(std::span<std::size_t>(perm));
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (std::size_t i = 0; i < sample_size; ++i) in_sample[perm[i]] = 1;
        }
        RegressionTree tree = exec != Exec::Reference ? build_levelwise(x, sorted, resid, in_sample, params, exec)
                                                     : build_reference(x, resid, in_sample, params);
        add_tree(tree, x, model.learning_rate, f, exec);
        model.trees.push_back(std::move(tree));
    }
    if (training_predictions) *training_predictions = std::move(f);
    return model;
}

std::vector<double> gbt_training_curve(const GbtModel& model, const Matrix& x, const Vector& y) {
    Vector f = Vector::Constant(x.rows(), model.base_score);
    std::vector<double> curve;
    curve.push_back((y - f).squaredNorm() / static_cast<double>(y.size()));
    for (const auto& tree : model.trees) {
        add_tree(tree, x, model.learning_rate, f, Exec::Serial);
        curve.push_back((y - f).squaredNorm() / static_cast<double>(y.size()));
    }
    return curve;
}

Vector predict(const GbtModel& model, const Matrix& x, Exec exec) {
    if (x.cols() != model.n_features) {
        fail(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.n_features) + " features, got " +
                                               std::to_string(x.cols()));
    }
    Vector f = Vector::Constant(x.rows(), model.base_score);
    for (const auto& tree : model.trees) add_tree(tree, x, model.learning_rate, f, exec);
    return f;
}

}  // namespace ratedml
