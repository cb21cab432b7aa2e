#pragma once

#include <array>

#include <Eigen/Dense>

namespace memsim::hex20 {

constexpr int kNodes = 20;
constexpr int kFaceNodes = 8;
constexpr int kFaces = 6;

/// Reference coordinates of the 20 serendipity nodes, VTK quadratic
/// hexahedron ordering: 8 corners, then bottom, top and vertical edge
/// midpoints.
inline const std::array<Eigen::Vector3d, kNodes>& node_coords() {
    static const std::array<Eigen::Vector3d, kNodes> xi = {{
        {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
        {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
        {0, -1, -1},  {1, 0, -1},  {0, 1, -1}, {-1, 0, -1},
        {0, -1, 1},   {1, 0, 1},   {0, 1, 1},  {-1, 0, 1},
        {-1, -1, 0},  {1, -1, 0},  {1, 1, 0},  {-1, 1, 0},
    }};
    return xi;
}

/// Serendipity basis values and reference-coordinate gradients at xi.
inline void shape_eval(const Eigen::Vector3d& xi, Eigen::Matrix<double, kNodes, 1>& N,
                       Eigen::Matrix<double, kNodes, 3>& dN) {
    const double x = xi[0], y = xi[1], z = xi[2];
    const auto& nodes = node_coords();
    for (int a = 0; a < kNodes; ++a) {
        const double xa = nodes[a][0], ya = nodes[a][1], za = nodes[a][2];
        if (a < 8) {
            const double px = 1.0 + xa * x, py = 1.0 + ya * y, pz = 1.0 + za * z;
            const double q = xa * x + ya * y + za * z - 2.0;
            N[a] = 0.125 * px * py * pz * q;
            dN(a, 0) = 0.125 * xa * py * pz * (q + px);
            dN(a, 1) = 0.125 * ya * px * pz * (q + py);
            dN(a, 2) = 0.125 * za * px * py * (q + pz);
        } else if (xa == 0.0) {
            const double py = 1.0 + ya * y, pz = 1.0 + za * z;
            N[a] = 0.25 * (1.0 - x * x) * py * pz;
            dN(a, 0) = -0.5 * x * py * pz;
            dN(a, 1) = 0.25 * (1.0 - x * x) * ya * pz;
            dN(a, 2) = 0.25 * (1.0 - x * x) * py * za;
        } else if (ya == 0.0) {
            const double px = 1.0 + xa * x, pz = 1.0 + za * z;
            N[a] = 0.25 * (1.0 - y * y) * px * pz;
            dN(a, 0) = 0.25 * (1.0 - y * y) * xa * pz;
            dN(a, 1) = -0.5 * y * px * pz;
            dN(a, 2) = 0.25 * (1.0 - y * y) * px * za;
        } else {
            const double px = 1.0 + xa * x, py = 1.0 + ya * y;
            N[a] = 0.25 * (1.0 - z * z) * px * py;
            dN(a, 0) = 0.25 * (1.0 - z * z) * xa * py;
            dN(a, 1) = 0.25 * (1.0 - z * z) * px * ya;
            dN(a, 2) = -0.5 * z * px * py;
        }
    }
}

struct QuadraturePoint {
    Eigen::Vector3d xi;
    double weight;
};

/// 3x3x3 Gauss rule (exact to degree 5 per direction).
inline const std::array<QuadraturePoint, 27>& quadrature() {
    static const std::array<QuadraturePoint, 27> pts = [] {
        const double g = std::sqrt(3.0 / 5.0);
        const double p[3] = {-g, 0.0, g};
        const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        std::array<QuadraturePoint, 27> q{};
        int n = 0;
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i)
                    q[n++] = {Eigen::Vector3d(p[i], p[j], p[k]), w[i] * w[j] * w[k]};
        return q;
    }();
    return pts;
}

/// Local node ids of the six faces, each an 8-node quadratic quad ordered
/// counterclockwise seen from outside (corners first, then edge midpoints).
/// Face order: -x, +x, -y, +y, -z, +z.
inline const std::array<std::array<int, kFaceNodes>, kFaces>& face_nodes() {
    static const std::array<std::array<int, kFaceNodes>, kFaces> f = {{
        {0, 4, 7, 3, 16, 15, 19, 11},
        {1, 2, 6, 5, 9, 18, 13, 17},
        {0, 1, 5, 4, 8, 17, 12, 16},
        {3, 7, 6, 2, 19, 14, 18, 10},
        {0, 3, 2, 1, 11, 10, 9, 8},
        {4, 5, 6, 7, 12, 13, 14, 15},
    }};
    return f;
}

/// 8-node serendipity quad basis on [-1,1]^2 for face integrals.
inline void face_shape_eval(double u, double v, Eigen::Matrix<double, kFaceNodes, 1>& N,
                            Eigen::Matrix<double, kFaceNodes, 2>& dN) {
    static const double uc[kFaceNodes] = {-1, 1, 1, -1, 0, 1, 0, -1};
    static const double vc[kFaceNodes] = {-1, -1, 1, 1, -1, 0, 1, 0};
    for (int a = 0; a < kFaceNodes; ++a) {
        const double ua = uc[a], va = vc[a];
        if (a < 4) {
            N[a] = 0.25 * (1 + ua * u) * (1 + va * v) * (ua * u + va * v - 1);
            dN(a, 0) = 0.25 * ua * (1 + va * v) * (2 * ua * u + va * v);
            dN(a, 1) = 0.25 * va * (1 + ua * u) * (ua * u + 2 * va * v);
        } else if (ua == 0.0) {
            N[a] = 0.5 * (1 - u * u) * (1 + va * v);
            dN(a, 0) = -u * (1 + va * v);
            dN(a, 1) = 0.5 * (1 - u * u) * va;
        } else {
            N[a] = 0.5 * (1 + ua * u) * (1 - v * v);
            dN(a, 0) = 0.5 * ua * (1 - v * v);
            dN(a, 1) = -v * (1 + ua * u);
        }
    }
}

struct FaceQuadraturePoint {
    double u, v, weight;
};

/// 3x3 Gauss rule for face integrals.
inline const std::array<FaceQuadraturePoint, 9>& face_quadrature() {
    static const std::array<FaceQuadraturePoint, 9> pts = [] {
        const double g = std::sqrt(3.0 / 5.0);
        const double p[3] = {-g, 0.0, g};
        const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        std::array<FaceQuadraturePoint, 9> q{};
        int n = 0;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                q[n++] = {p[i], p[j], w[i] * w[j]};
        return q;
    }();
    return pts;
}

} // namespace memsim::hex20
