#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "asist/split.hpp"

namespace asist {

struct ForestConfig {
    int n_trees = 9;
    int max_depth = 10;
    int pool_size = 1000;
    double min_gain = 0.05;
    int min_samples = 30;
    int cells_per_tree = 20000;
    int m = 9;
    std::uint64_t seed = 1;
};

struct TreeNode {
    SplitFunction split;
    int left = -1;
    int right = -1;
    std::vector<double> leaf;  // class distribution when left < 0

    [[nodiscard]] bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0
};

struct Forest {
    int m = 9;
    int n_classes = 0;  // includes clutter label 0
    std::vector<Tree> trees;
};

// Per-point class scores; column p is a probability distribution over the
// n_c+1 labels (row 0 = clutter).
struct PointScores {
    Eigen::MatrixXd f;  // n_classes x n_p
};

namespace forest_detail {

// Per-cell sums precomputed per training block: 3D integral volumes over both
// channels plus radial-by-z bin totals, so every split family evaluates in a
// handful of reads instead of a voxel scan.
struct CellScratch {
    std::vector<double> iv_occ, iv_dist;  // (m+1)^3 exclusive prefix sums
    std::vector<double> rad_occ, rad_dist;  // n_r * m

    void build(const Cell& cell) {
        const int m = cell.m;
        const int s = m + 1;
        iv_occ.assign(static_cast<std::size_t>(s) * s * s, 0.0);
        iv_dist.assign(iv_occ.size(), 0.0);
        auto iv = [s](std::vector<double>& v, int i, int j, int k) -> double& {
            return v[static_cast<std::size_t>(i) + static_cast<std::size_t>(s) * (j + static_cast<std::size_t>(s) * k)];
        };
        for (int k = 1; k <= m; ++k)
            for (int j = 1; j <= m; ++j) {
                double row_occ = 0.0, row_dist = 0.0;
                for (int i = 1; i <= m; ++i) {
                    const int lin = cell.local_index(i - 1, j - 1, k - 1);
                    row_occ += cell.occupancy[lin];
                    row_dist += cell.distance[lin];
                    iv(iv_occ, i, j, k) = row_occ + iv(iv_occ, i, j - 1, k) + iv(iv_occ, i, j, k - 1) -
                                          iv(iv_occ, i, j - 1, k - 1);
                    iv(iv_dist, i, j, k) = row_dist + iv(iv_dist, i, j - 1, k) + iv(iv_dist, i, j, k - 1) -
                                           iv(iv_dist, i, j - 1, k - 1);
                }
            }
        const int n_r = radial_bin_count(m);
        rad_occ.assign(static_cast<std::size_t>(n_r) * m, 0.0);
        rad_dist.assign(rad_occ.size(), 0.0);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) {
                    const int bin = radial_bin(i, j, m) + n_r * k;
                    const int lin = cell.local_index(i, j, k);
                    rad_occ[bin] += cell.occupancy[lin];
                    rad_dist[bin] += cell.distance[lin];
                }
    }

    [[nodiscard]] double box_sum(const std::vector<double>& v, int m, const Eigen::Vector3i& lo,
                                 const Eigen::Vector3i& hi) const {
        const int s = m + 1;
        auto at = [&](int i, int j, int k) {
            return v[static_cast<std::size_t>(i) + static_cast<std::size_t>(s) * (j + static_cast<std::size_t>(s) * k)];
        };
        const int x1 = lo.x(), y1 = lo.y(), z1 = lo.z();
        const int x2 = hi.x() + 1, y2 = hi.y() + 1, z2 = hi.z() + 1;
        return at(x2, y2, z2) - at(x1, y2, z2) - at(x2, y1, z2) - at(x2, y2, z1) + at(x1, y1, z2) +
               at(x1, y2, z1) + at(x2, y1, z1) - at(x1, y1, z1);
    }
};

inline double fast_response(const SplitFunction& s, const Cell& cell, const CellScratch& scratch) {
    const bool dist = s.channel == CellChannel::Distance;
    const int m = cell.m;
    const int n_r = radial_bin_count(m);
    switch (s.family) {
        case SplitFamily::Height:
            return cell.height;
        case SplitFamily::RotationInvariant: {
            const std::vector<double>& rad = dist ? scratch.rad_dist : scratch.rad_occ;
            double acc = 0.0;
            for (std::size_t i = 0; i < rad.size(); ++i) acc += s.radial[i] * rad[i];
            return acc;
        }
        case SplitFamily::Box:
            return scratch.box_sum(dist ? scratch.iv_dist : scratch.iv_occ, m, s.box_lo, s.box_hi);
        case SplitFamily::HorizontalSlab: {
            const std::vector<double>& rad = dist ? scratch.rad_dist : scratch.rad_occ;
            const int k = s.slab_z + m / 2;
            double acc = 0.0;
            for (int r = 0; r < n_r; ++r) acc += rad[r + n_r * k];
            return acc;
        }
        case SplitFamily::Pixelwise: {
            double acc = 0.0;
            for (int t = 0; t < s.pixel_count; ++t)
                acc += s.pixel_coef[t] * cell.channel_value(dist, s.pixel_index[t]);
            return acc;
        }
    }
    return 0.0;
}

inline double entropy(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        const double p = c / total;
        h -= p * std::log(p);
    }
    return h;
}

struct NodeSplitResult {
    bool found = false;
    SplitFunction split;
    double gain = 0.0;
    std::vector<std::uint8_t> goes_right;  // per local cell index
};

// Evaluates a pool of candidates on the node's cells in two block sweeps:
// first to record each candidate's response range (from which tau is drawn),
// then to count class histograms on both sides of the threshold.
inline NodeSplitResult best_split(const std::vector<Cell>& cells, const std::vector<int>& labels,
                                  const std::vector<int>& node_cells, int n_classes,
                                  const ForestConfig& config, Rng& node_rng) {
    const int n = static_cast<int>(node_cells.size());
    const int pool = config.pool_size;
    constexpr int kBlock = 512;

    std::vector<SplitFunction> candidates(pool);
    for (int c = 0; c < pool; ++c) candidates[c] = sample_split(node_rng, config.m);

    std::vector<double> lo(pool, std::numeric_limits<double>::infinity());
    std::vector<double> hi(pool, -std::numeric_limits<double>::infinity());
    std::vector<CellScratch> scratch(std::min(n, kBlock));

    for (int b0 = 0; b0 < n; b0 += kBlock) {
        const int b1 = std::min(n, b0 + kBlock);
        for (int i = b0; i < b1; ++i) scratch[i - b0].build(cells[node_cells[i]]);
        for (int c = 0; c < pool; ++c)
            for (int i = b0; i < b1; ++i) {
                const double r = fast_response(candidates[c], cells[node_cells[i]], scratch[i - b0]);
                lo[c] = std::min(lo[c], r);
                hi[c] = std::max(hi[c], r);
            }
    }
    for (int c = 0; c < pool; ++c) candidates[c].tau = node_rng.uniform(lo[c], hi[c]);

    std::vector<double> parent_counts(n_classes, 0.0);
    for (int i : node_cells) parent_counts[labels[i]] += 1.0;
    const double parent_entropy = entropy(parent_counts, n);

    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> side_bits(static_cast<std::size_t>(pool) * words, 0);
    std::vector<double> right_counts(static_cast<std::size_t>(pool) * n_classes, 0.0);
    std::vector<int> right_total(pool, 0);

    for (int b0 = 0; b0 < n; b0 += kBlock) {
        const int b1 = std::min(n, b0 + kBlock);
        for (int i = b0; i < b1; ++i) scratch[i - b0].build(cells[node_cells[i]]);
        for (int c = 0; c < pool; ++c) {
            double* rc = right_counts.data() + static_cast<std::size_t>(c) * n_classes;
            std::uint64_t* bits = side_bits.data() + static_cast<std::size_t>(c) * words;
            for (int i = b0; i < b1; ++i) {
                const double r = fast_response(candidates[c], cells[node_cells[i]], scratch[i - b0]);
                if (r > candidates[c].tau) {
                    bits[i / 64] |= std::uint64_t{1} << (i % 64);
                    rc[labels[node_cells[i]]] += 1.0;
                    ++right_total[c];
                }
            }
        }
    }

    NodeSplitResult result;
    std::vector<double> left_cnt(n_classes);
    for (int c = 0; c < pool; ++c) {
        const int nr = right_total[c];
        const int nl = n - nr;
        if (nl == 0 || nr == 0) continue;
        const double* rc = right_counts.data() + static_cast<std::size_t>(c) * n_classes;
        for (int k = 0; k < n_classes; ++k) left_cnt[k] = parent_counts[k] - rc[k];
        const double gain =
            parent_entropy -
            (double(nl) / n) * entropy(left_cnt, nl) -
            (double(nr) / n) * entropy(std::vector<double>(rc, rc + n_classes), nr);
        if (!result.found || gain > result.gain) {
            result.found = true;
            result.gain = gain;
            result.split = candidates[c];
            result.goes_right.assign(n, 0);
            const std::uint64_t* bits = side_bits.data() + static_cast<std::size_t>(c) * words;
            for (int i = 0; i < n; ++i)
                result.goes_right[i] = (bits[i / 64] >> (i % 64)) & 1;
        }
    }
    return result;
}

inline std::vector<double> leaf_distribution(const std::vector<int>& labels,
                                             const std::vector<int>& node_cells, int n_classes) {
    std::vector<double> dist(n_classes, 0.0);
    for (int i : node_cells) dist[labels[i]] += 1.0;
    for (double& d : dist) d /= static_cast<double>(node_cells.size());
    return dist;
}

inline int build_node(Tree& tree, const std::vector<Cell>& cells, const std::vector<int>& labels,
                      std::vector<int>&& node_cells, int depth, std::uint64_t path,
                      const Rng& tree_rng, int n_classes, const ForestConfig& config) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    bool pure = true;
    for (std::size_t i = 1; i < node_cells.size(); ++i)
        if (labels[node_cells[i]] != labels[node_cells[0]]) {
            pure = false;
            break;
        }

    if (pure || depth >= config.max_depth || static_cast<int>(node_cells.size()) < config.min_samples) {
        tree.nodes[index].leaf = leaf_distribution(labels, node_cells, n_classes);
        return index;
    }

    Rng node_rng = tree_rng.derive(path);
    NodeSplitResult best = best_split(cells, labels, node_cells, n_classes, config, node_rng);
    if (!best.found || best.gain < config.min_gain) {
        tree.nodes[index].leaf = leaf_distribution(labels, node_cells, n_classes);
        return index;
    }

    std::vector<int> left_cells, right_cells;
    for (std::size_t i = 0; i < node_cells.size(); ++i)
        (best.goes_right[i] ? right_cells : left_cells).push_back(node_cells[i]);
    node_cells.clear();
    node_cells.shrink_to_fit();

    tree.nodes[index].split = best.split;
    const int left = build_node(tree, cells, labels, std::move(left_cells), depth + 1, path * 2,
                                tree_rng, n_classes, config);
    const int right = build_node(tree, cells, labels, std::move(right_cells), depth + 1, path * 2 + 1,
                                 tree_rng, n_classes, config);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

}  // namespace forest_detail

inline Forest train_forest(const std::vector<Cell>& cells, const std::vector<int>& labels,
                           const ForestConfig& config) {
    if (cells.size() != labels.size()) fail("invalid-argument", "cells/labels size mismatch");
    if (cells.empty()) fail("degenerate-training-set", "no training cells");
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        fail("degenerate-training-set", "training set has fewer than 2 distinct labels");
    if (*distinct.begin() < 0) fail("invalid-argument", "negative class label");

    Forest forest;
    forest.m = config.m;
    forest.n_classes = *distinct.rbegin() + 1;
    forest.trees.resize(config.n_trees);

    const Rng base(config.seed);
    const int n_all = static_cast<int>(cells.size());
    for (int t = 0; t < config.n_trees; ++t) {
        Rng sample_rng = base.derive(2 * static_cast<std::uint64_t>(t));
        const Rng tree_rng = base.derive(2 * static_cast<std::uint64_t>(t) + 1);

        std::vector<int> take(n_all);
        std::iota(take.begin(), take.end(), 0);
        if (n_all > config.cells_per_tree) {
            // partial Fisher-Yates: first cells_per_tree entries are a uniform
            // sample without replacement
            for (int i = 0; i < config.cells_per_tree; ++i) {
                const int j = i + static_cast<int>(sample_rng.uniform_index(n_all - i));
                std::swap(take[i], take[j]);
            }
            take.resize(config.cells_per_tree);
            std::sort(take.begin(), take.end());
        }
        forest.trees[t].nodes.reserve(128);
        forest_detail::build_node(forest.trees[t], cells, labels, std::move(take), 0, 1, tree_rng,
                                  forest.n_classes, config);
    }
    return forest;
}

inline Eigen::VectorXd predict_cell(const Forest& forest, const Cell& cell) {
    if (cell.m != forest.m) fail("forest-mismatch", "cell size does not match the trained forest");
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(forest.n_classes);
    for (const Tree& tree : forest.trees) {
        int node = 0;
        while (!tree.nodes[node].is_leaf())
            node = eval_split(tree.nodes[node].split, cell) ? tree.nodes[node].right
                                                            : tree.nodes[node].left;
        for (int c = 0; c < forest.n_classes; ++c) scores[c] += tree.nodes[node].leaf[c];
    }
    return scores / static_cast<double>(forest.trees.size());
}

// Scores every occupied voxel's cell, then hands each point the scores of its
// nearest occupied voxel center.
inline PointScores classify_points(const Forest& forest, const VoxelGrid& grid,
                                   const PointCloud& cloud) {
    const std::vector<Eigen::Vector3i> voxels = occupied_voxels(grid);
    if (voxels.empty()) fail("invalid-cloud", "grid has no occupied voxels");

    Eigen::MatrixXd voxel_scores(forest.n_classes, voxels.size());
    std::vector<Vec3> centers(voxels.size());
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        const Cell cell = extract_cell(grid, voxels[i], forest.m);
        voxel_scores.col(i) = predict_cell(forest, cell);
        centers[i] = grid.center(voxels[i].x(), voxels[i].y(), voxels[i].z());
    }

    const KdTree tree(centers);
    PointScores scores;
    scores.f.resize(forest.n_classes, cloud.size());
    for (std::size_t p = 0; p < cloud.size(); ++p)
        scores.f.col(p) = voxel_scores.col(tree.nearest(cloud.points[p]).index);
    return scores;
}

// --- persistence ---------------------------------------------------------

namespace forest_detail {

inline nlohmann::json split_to_json(const SplitFunction& s) {
    nlohmann::json j;
    j["family"] = family_name(s.family);
    j["channel"] = channel_name(s.channel);
    j["tau"] = s.tau;
    switch (s.family) {
        case SplitFamily::Height:
            break;
        case SplitFamily::RotationInvariant:
            j["radial"] = s.radial;
            break;
        case SplitFamily::Box:
            j["lo"] = {s.box_lo.x(), s.box_lo.y(), s.box_lo.z()};
            j["hi"] = {s.box_hi.x(), s.box_hi.y(), s.box_hi.z()};
            break;
        case SplitFamily::HorizontalSlab:
            j["slab_z"] = s.slab_z;
            break;
        case SplitFamily::Pixelwise: {
            nlohmann::json pix = nlohmann::json::array();
            for (int t = 0; t < s.pixel_count; ++t)
                pix.push_back({s.pixel_index[t], s.pixel_coef[t]});
            j["pixels"] = pix;
            break;
        }
    }
    return j;
}

inline SplitFunction split_from_json(const nlohmann::json& j) {
    SplitFunction s;
    s.family = family_from_name(j.at("family").get<std::string>());
    s.channel = channel_from_name(j.at("channel").get<std::string>());
    s.tau = j.at("tau").get<double>();
    switch (s.family) {
        case SplitFamily::Height:
            break;
        case SplitFamily::RotationInvariant:
            s.radial = j.at("radial").get<std::vector<double>>();
            break;
        case SplitFamily::Box:
            for (int a = 0; a < 3; ++a) {
                s.box_lo[a] = j.at("lo")[a].get<int>();
                s.box_hi[a] = j.at("hi")[a].get<int>();
            }
            break;
        case SplitFamily::HorizontalSlab:
            s.slab_z = j.at("slab_z").get<int>();
            break;
        case SplitFamily::Pixelwise: {
            const auto& pix = j.at("pixels");
            s.pixel_count = static_cast<int>(pix.size());
            if (s.pixel_count > 3) fail("parse-error", "pixelwise split with more than 3 voxels");
            for (int t = 0; t < s.pixel_count; ++t) {
                s.pixel_index[t] = pix[t][0].get<int>();
                s.pixel_coef[t] = pix[t][1].get<int>();
            }
            break;
        }
    }
    return s;
}

}  // namespace forest_detail

inline void save_forest(const std::string& path, const Forest& forest) {
    nlohmann::json doc;
    doc["format"] = "asist-forest";
    doc["version"] = 1;
    doc["m"] = forest.m;
    doc["n_classes"] = forest.n_classes;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& tree : forest.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& node : tree.nodes) {
            nlohmann::json jn;
            if (node.is_leaf()) {
                jn["leaf"] = node.leaf;
            } else {
                jn["split"] = forest_detail::split_to_json(node.split);
                jn["left"] = node.left;
                jn["right"] = node.right;
            }
            nodes.push_back(std::move(jn));
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    doc["trees"] = std::move(trees);

    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open '" + path + "' for writing");
    out << doc.dump(1, '\t') << '\n';
    if (!out) fail("io-error", "write failure on '" + path + "'");
}

inline Forest load_forest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail("parse-error", std::string("forest JSON: ") + e.what());
    }
    if (doc.value("format", "") != "asist-forest") fail("parse-error", "not a forest document");
    if (doc.value("version", 0) != 1) fail("parse-error", "unsupported forest version");

    Forest forest;
    forest.m = doc.at("m").get<int>();
    forest.n_classes = doc.at("n_classes").get<int>();
    if (forest.m < 1 || forest.m % 2 == 0) fail("parse-error", "forest m must be odd");
    if (forest.n_classes < 2) fail("parse-error", "forest needs at least 2 classes");
    for (const auto& jt : doc.at("trees")) {
        Tree tree;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode node;
            if (jn.contains("leaf")) {
                node.leaf = jn.at("leaf").get<std::vector<double>>();
                if (static_cast<int>(node.leaf.size()) != forest.n_classes)
                    fail("parse-error", "leaf distribution size mismatch");
            } else {
                node.split = forest_detail::split_from_json(jn.at("split"));
                node.left = jn.at("left").get<int>();
                node.right = jn.at("right").get<int>();
            }
            tree.nodes.push_back(std::move(node));
        }
        if (tree.nodes.empty()) fail("parse-error", "tree with no nodes");
        forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.empty()) fail("parse-error", "forest with no trees");
    return forest;
}

}  // namespace asist
