#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "asist/graph.hpp"
#include "asist/kdtree.hpp"
#include "asist/mesh.hpp"
#include "asist/ply_io.hpp"
#include "asist/spectral.hpp"
#include "asist/voxel_grid.hpp"

namespace {

using namespace asist;

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("asist_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

PointCloud random_cloud(std::size_t n, Rng& rng, double span = 4.0) {
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.emplace_back(rng.uniform(-span, span), rng.uniform(-span, span),
                                  rng.uniform(-span, span));
    return cloud;
}

Graph path_graph(int n) {
    Graph g;
    g.n = n;
    g.adjacency.resize(n);
    g.degree.assign(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        g.adjacency[i].emplace_back(i + 1, 1.0);
        g.adjacency[i + 1].emplace_back(i, 1.0);
        g.degree[i] += 1.0;
        g.degree[i + 1] += 1.0;
    }
    for (auto& adj : g.adjacency)
        std::sort(adj.begin(), adj.end());
    return g;
}

}  // namespace

TEST_CASE("ascii ply coordinates load bit-equal") {
    TempDir tmp("ply_ascii");
    {
        std::ofstream out(tmp.file("three.ply"));
        out << "ply\nformat ascii 1.0\ncomment hand written\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n"
               "0.125 -3.5 10.0625\n1 2 3\n-0.75 0 42\n";
    }
    const PointCloud cloud = load_ply(tmp.file("three.ply"));
    REQUIRE(cloud.size() == 3);
    CHECK(cloud.points[0] == Vec3(0.125, -3.5, 10.0625));
    CHECK(cloud.points[1] == Vec3(1.0, 2.0, 3.0));
    CHECK(cloud.points[2] == Vec3(-0.75, 0.0, 42.0));
    CHECK_FALSE(cloud.has_labels());
}

TEST_CASE("empty vertex element is rejected") {
    TempDir tmp("ply_empty");
    {
        std::ofstream out(tmp.file("empty.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 0\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n";
    }
    try {
        load_ply(tmp.file("empty.ply"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "empty-cloud");
    }
}

TEST_CASE("binary round trip preserves coordinates and labels exactly") {
    TempDir tmp("ply_roundtrip");
    Rng rng(42);
    PointCloud cloud = random_cloud(1000, rng);
    cloud.labels.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        cloud.labels[i] = static_cast<int>(rng.uniform_index(5));

    save_ply(tmp.file("cloud.ply"), cloud);
    const PointCloud back = load_ply(tmp.file("cloud.ply"));
    REQUIRE(back.size() == cloud.size());
    REQUIRE(back.has_labels());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(back.points[i] == cloud.points[i]);  // bit-equal
        CHECK(back.labels[i] == cloud.labels[i]);
    }

    save_ply(tmp.file("cloud_ascii.ply"), cloud, /*binary=*/false);
    const PointCloud ascii_back = load_ply(tmp.file("cloud_ascii.ply"));
    REQUIRE(ascii_back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(ascii_back.points[i] == cloud.points[i]);  // %.17g round-trips doubles
}

TEST_CASE("extra vertex properties are skipped, bad headers rejected") {
    TempDir tmp("ply_extra");
    {
        std::ofstream out(tmp.file("extra.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 2\n"
               "property float confidence\nproperty double x\nproperty double y\n"
               "property double z\nproperty uchar label\nend_header\n"
               "0.9 1 2 3 1\n0.1 4 5 6 2\n";
    }
    const PointCloud cloud = load_ply(tmp.file("extra.ply"));
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[1] == Vec3(4.0, 5.0, 6.0));
    REQUIRE(cloud.has_labels());
    CHECK(cloud.labels[0] == 1);
    CHECK(cloud.labels[1] == 2);

    {
        std::ofstream out(tmp.file("bad.ply"));
        out << "ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n";
    }
    try {
        load_ply(tmp.file("bad.ply"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "parse-error");
    }
}

TEST_CASE("voxelize covers the cloud with a one-cell margin") {
    PointCloud one;
    one.points.emplace_back(0.0, 0.0, 0.0);
    const VoxelGrid grid = voxelize(one, 1.0);
    CHECK(grid.voxel_size == 1.0);
    CHECK(grid.dims.minCoeff() >= 3);
    int occupied = 0;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) occupied += grid.occupancy[i];
    CHECK(occupied == 1);
    const Eigen::Vector3i c = grid.cell_of(one.points[0]);
    CHECK(grid.occupied(c.x(), c.y(), c.z()));
    // margin shells stay empty
    CHECK_FALSE(grid.occupied(0, 0, 0));
    CHECK_FALSE(grid.occupied(grid.dims.x() - 1, grid.dims.y() - 1, grid.dims.z() - 1));

    const VoxelGrid fine = voxelize(one, 0.075);
    CHECK(fine.voxel_size == 0.075);
}

TEST_CASE("occupied voxel count equals distinct quantized coordinates") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const PointCloud cloud = random_cloud(200, rng, 2.0);
        const double vs = rng.uniform(0.05, 0.4);
        const VoxelGrid grid = voxelize(cloud, vs);

        std::set<std::tuple<int, int, int>> quantized;
        for (const Vec3& p : cloud.points)
            quantized.insert({static_cast<int>(std::floor((p.x() - grid.origin.x()) / vs)),
                              static_cast<int>(std::floor((p.y() - grid.origin.y()) / vs)),
                              static_cast<int>(std::floor((p.z() - grid.origin.z()) / vs))});
        std::size_t occupied = 0;
        for (std::size_t i = 0; i < grid.cell_count(); ++i) occupied += grid.occupancy[i];
        CHECK(occupied == quantized.size());
    }
}

TEST_CASE("distance transform matches brute-force nearest point search") {
    PointCloud one;
    one.points.emplace_back(0.0, 0.0, 0.0);
    VoxelGrid grid = voxelize(one, 1.0);
    distance_transform(grid, one);
    const Eigen::Vector3i c = grid.cell_of(one.points[0]);
    // the point sits at the center of its voxel, so the axis neighbor is one
    // voxel away and the occupied voxel itself is at distance zero
    CHECK(grid.distance_at(c.x(), c.y(), c.z()) == Catch::Approx(0.0).margin(1e-12));
    CHECK(grid.distance_at(c.x() + 1, c.y(), c.z()) == Catch::Approx(1.0).margin(1e-12));

    Rng rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const PointCloud cloud = random_cloud(40, rng, 0.5);
        VoxelGrid g = voxelize(cloud, 0.35);
        distance_transform(g, cloud);
        const double cap = 10.0 * g.voxel_size;
        for (int k = 0; k < g.dims.z(); ++k)
            for (int j = 0; j < g.dims.y(); ++j)
                for (int i = 0; i < g.dims.x(); ++i) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const Vec3& p : cloud.points)
                        best = std::min(best, (p - g.center(i, j, k)).norm());
                    best = std::min(best, cap);
                    REQUIRE(g.distance_at(i, j, k) == Catch::Approx(best).margin(1e-12));
                }
    }
}

TEST_CASE("fully occupied grid with centered points has zero distance everywhere") {
    VoxelGrid grid;
    grid.origin = Vec3(0.25, -1.0, 3.0);
    grid.voxel_size = 0.5;
    grid.dims = Eigen::Vector3i(4, 4, 4);
    grid.occupancy.assign(grid.cell_count(), 1);
    PointCloud centers;
    for (int k = 0; k < grid.dims.z(); ++k)
        for (int j = 0; j < grid.dims.y(); ++j)
            for (int i = 0; i < grid.dims.x(); ++i) centers.points.push_back(grid.center(i, j, k));
    distance_transform(grid, centers);
    for (std::size_t i = 0; i < grid.cell_count(); ++i)
        REQUIRE(grid.distance[i] <= 1e-12);
}

TEST_CASE("kd-tree queries match exhaustive search") {
    Rng rng(5);
    PointCloud cloud = random_cloud(300, rng, 1.0);
    cloud.points.push_back(cloud.points[0]);  // duplicate to exercise tie-breaks
    const KdTree tree(cloud.points);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 q(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
        std::vector<Neighbor> brute(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            brute[i] = {static_cast<int>(i), (cloud.points[i] - q).squaredNorm()};
        std::sort(brute.begin(), brute.end(), [](const Neighbor& a, const Neighbor& b) {
            if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
            return a.index < b.index;
        });
        const Neighbor nn = tree.nearest(q);
        CHECK(nn.index == brute[0].index);
        CHECK(nn.sq_dist == Catch::Approx(brute[0].sq_dist).margin(1e-15));
        const auto knn = tree.knn(q, 7);
        REQUIRE(knn.size() == 7);
        for (int i = 0; i < 7; ++i) CHECK(knn[i].index == brute[i].index);
    }
}

TEST_CASE("knn graph weights and neighbor sets are exact") {
    PointCloud two;
    two.points.emplace_back(0.0, 0.0, 0.0);
    two.points.emplace_back(0.0, 0.0, 2.0);
    const double sigma = 5.0;
    const Graph g2 = build_knn_graph(two, 1, sigma);
    REQUIRE(g2.adjacency[0].size() == 1);
    REQUIRE(g2.adjacency[1].size() == 1);
    CHECK(g2.adjacency[0][0].second == Catch::Approx(std::exp(-4.0 / (2.0 * sigma * sigma))));

    Rng rng(11);
    const PointCloud cloud = random_cloud(50, rng, 1.0);
    const int k = 10;
    const Graph g = build_knn_graph(cloud, k, 0.8);
    std::vector<std::set<int>> expected(cloud.size());
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        std::vector<std::pair<double, int>> all;
        for (std::size_t q = 0; q < cloud.size(); ++q)
            if (q != p) all.emplace_back((cloud.points[p] - cloud.points[q]).squaredNorm(), static_cast<int>(q));
        std::sort(all.begin(), all.end());
        for (int i = 0; i < k; ++i) {
            expected[p].insert(all[i].second);
            expected[all[i].second].insert(static_cast<int>(p));  // union symmetrization
        }
    }
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        std::set<int> got;
        for (const auto& [q, w] : g.adjacency[p]) {
            got.insert(q);
            CHECK(w == Catch::Approx(std::exp(-(cloud.points[p] - cloud.points[q]).squaredNorm() /
                                              (2.0 * 0.8 * 0.8))));
        }
        CHECK(got == expected[p]);
        CHECK(g.degree[p] > 0.0);
    }

    PointCloud tiny;
    tiny.points.emplace_back(0.0, 0.0, 0.0);
    try {
        build_knn_graph(tiny, 1, 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "too-few-points");
    }
}

TEST_CASE("random-walk laplacian has zero row sums and unit structure") {
    const Graph g2 = path_graph(2);
    const Eigen::MatrixXd L2 = Eigen::MatrixXd(laplacian(g2));
    CHECK(L2(0, 0) == 1.0);
    CHECK(L2(0, 1) == -1.0);
    CHECK(L2(1, 0) == -1.0);
    CHECK(L2(1, 1) == 1.0);

    Rng rng(23);
    const PointCloud cloud = random_cloud(20, rng, 1.0);
    const Graph g = build_knn_graph(cloud, 4, 0.7);
    const Eigen::SparseMatrix<double> L = laplacian(g);
    const Eigen::VectorXd row_sums = L * Eigen::VectorXd::Ones(g.n);
    for (int p = 0; p < g.n; ++p) REQUIRE(std::abs(row_sums[p]) <= 1e-14);

    // the symmetrized operator must be positive semidefinite with a zero mode
    Eigen::MatrixXd L_sym = Eigen::MatrixXd::Identity(g.n, g.n);
    for (int p = 0; p < g.n; ++p)
        for (const auto& [q, w] : g.adjacency[p])
            L_sym(p, q) -= w / std::sqrt(g.degree[p] * g.degree[q]);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L_sym);
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-10);
}

TEST_CASE("spectral basis reproduces the dense eigenvalues of a path graph") {
    const Graph g = path_graph(5);
    const Eigen::SparseMatrix<double> L = laplacian(g);
    const SpectralBasis basis = spectral_basis(L, g, 5);

    const Eigen::MatrixXd dense_l(L);
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense_l);  // general solver as oracle
    std::vector<double> oracle(5);
    for (int i = 0; i < 5; ++i) oracle[i] = es.eigenvalues()[i].real();
    std::sort(oracle.begin(), oracle.end());
    for (int i = 0; i < 5; ++i) {
        CHECK(basis.mu[i] == Catch::Approx(oracle[i]).margin(1e-8));
        if (i > 0) CHECK(basis.mu[i] >= basis.mu[i - 1]);
    }
}

TEST_CASE("connected graphs have one zero mode and a one-hot beta") {
    Rng rng(31);
    const PointCloud cloud = random_cloud(120, rng, 1.0);
    const Graph g = build_knn_graph(cloud, 10, 0.8);
    int n_comp = 0;
    connected_components(g, &n_comp);
    REQUIRE(n_comp == 1);

    const Eigen::SparseMatrix<double> L = laplacian(g);
    const SpectralBasis basis = spectral_basis(L, g, 30);
    int tiny = 0, nonzero_beta = 0;
    for (int i = 0; i < basis.mu.size(); ++i) {
        if (basis.mu[i] < 1e-9) ++tiny;
        if (basis.beta[i] != 0.0) ++nonzero_beta;
    }
    CHECK(tiny == 1);
    CHECK(nonzero_beta == 1);

    const Eigen::VectorXd ones_err = basis.phi * basis.beta - Eigen::VectorXd::Ones(g.n);
    CHECK(ones_err.cwiseAbs().maxCoeff() <= 1e-8);

    // degree-weighted orthogonality of eigenfunctions
    Eigen::VectorXd deg(g.n);
    for (int p = 0; p < g.n; ++p) deg[p] = g.degree[p];
    for (int i = 0; i < basis.phi.cols(); ++i)
        for (int j = i + 1; j < basis.phi.cols(); ++j) {
            const double dot = basis.phi.col(i).dot(deg.asDiagonal() * basis.phi.col(j));
            REQUIRE(std::abs(dot) <= 1e-6);
        }
}

TEST_CASE("disconnected graphs get one indicator mode per component") {
    PointCloud cloud;
    Rng rng(37);
    for (int i = 0; i < 40; ++i)
        cloud.points.emplace_back(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
    for (int i = 0; i < 40; ++i)
        cloud.points.emplace_back(100.0 + rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                                  rng.uniform(0.0, 1.0));
    const Graph g = build_knn_graph(cloud, 5, 0.5);
    int n_comp = 0;
    connected_components(g, &n_comp);
    REQUIRE(n_comp == 2);

    const SpectralBasis basis = spectral_basis(laplacian(g), g, 10);
    CHECK(basis.n_components == 2);
    int nonzero_beta = 0;
    for (int i = 0; i < basis.beta.size(); ++i)
        if (basis.beta[i] != 0.0) ++nonzero_beta;
    CHECK(nonzero_beta == 2);
    const Eigen::VectorXd ones_err = basis.phi * basis.beta - Eigen::VectorXd::Ones(g.n);
    CHECK(ones_err.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("iterative eigensolver agrees with the dense path") {
    Rng rng(41);
    const PointCloud cloud = random_cloud(400, rng, 1.5);
    const Graph g = build_knn_graph(cloud, 10, 1.0);
    int n_comp = 0;
    connected_components(g, &n_comp);
    REQUIRE(n_comp == 1);

    const Eigen::SparseMatrix<double> L = laplacian(g);
    const SpectralBasis dense = spectral_basis(L, g, 20, /*dense_threshold=*/2000);
    const SpectralBasis lanczos = spectral_basis(L, g, 20, /*dense_threshold=*/10);
    for (int i = 0; i < 20; ++i)
        CHECK(lanczos.mu[i] == Catch::Approx(dense.mu[i]).margin(1e-8));
    const Eigen::VectorXd ones_err = lanczos.phi * lanczos.beta - Eigen::VectorXd::Ones(g.n);
    CHECK(ones_err.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("off meshes parse, triangulate and sample within bounds") {
    TempDir tmp("off");
    {
        std::ofstream out(tmp.file("cube.off"));
        out << "OFF\n# unit cube\n8 6 0\n"
               "0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
               "4 0 1 2 3\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 3 7 4\n";
    }
    const TriMesh mesh = load_off(tmp.file("cube.off"));
    REQUIRE(mesh.vertices.size() == 8);
    REQUIRE(mesh.triangles.size() == 12);  // quads fan-triangulated
    CHECK(mesh.total_area() == Catch::Approx(6.0));

    Rng rng(3);
    const auto samples = sample_mesh_surface(mesh, 2000, rng);
    REQUIRE(samples.size() == 2000);
    for (const Vec3& p : samples) {
        CHECK(p.minCoeff() >= -1e-12);
        CHECK(p.maxCoeff() <= 1.0 + 1e-12);
    }
}
