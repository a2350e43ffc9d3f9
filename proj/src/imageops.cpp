#include "facesketch/imageops.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsk {

namespace {

// Edge function of (a, b) at p: positive when p lies left of a->b.
double edge_fn(const Vec3& a, const Vec3& b, double px, double py)
{
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

// Evaluated with the lower vertex id first so both triangles sharing an edge
// see exactly negated values.
double canonical_edge(const TriMesh& m, int u, int v, double px, double py)
{
    if (u < v) return edge_fn(m.vertices[u], m.vertices[v], px, py);
    return -edge_fn(m.vertices[v], m.vertices[u], px, py);
}

// Top-left rule for a counter-clockwise triangle in y-up coordinates.
bool owns_edge(const Vec3& a, const Vec3& b)
{
    const double dy = b.y() - a.y();
    return dy < 0 || (dy == 0 && b.x() < a.x());
}

template <typename Visit>
void rasterize(const TriMesh& mesh, const OrthoCamera& cam, Visit&& visit)
{
    const int W = cam.width, H = cam.height;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& f = mesh.triangles[t];
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        const double area = edge_fn(a, b, c.x(), c.y());
        if (!(area > 0)) continue;  // back-facing or edge-on
        const double xmin = std::min({a.x(), b.x(), c.x()}), xmax = std::max({a.x(), b.x(), c.x()});
        const double ymin = std::min({a.y(), b.y(), c.y()}), ymax = std::max({a.y(), b.y(), c.y()});
        const int i0 = std::max(0, static_cast<int>(std::ceil(cam.col_of(xmin))));
        const int i1 = std::min(W - 1, static_cast<int>(std::floor(cam.col_of(xmax))));
        const int j0 = std::max(0, static_cast<int>(std::ceil(cam.row_of(ymax))));
        const int j1 = std::min(H - 1, static_cast<int>(std::floor(cam.row_of(ymin))));
        if (i0 > i1 || j0 > j1) continue;
        const bool own0 = owns_edge(b, c), own1 = owns_edge(c, a), own2 = owns_edge(a, b);
        for (int j = j0; j <= j1; ++j) {
            const double y = cam.y_of(j);
            for (int i = i0; i <= i1; ++i) {
                const double x = cam.x_of(i);
                const double w0 = canonical_edge(mesh, f[1], f[2], x, y);
                if (w0 < 0 || (w0 == 0 && !own0)) continue;
                const double w1 = canonical_edge(mesh, f[2], f[0], x, y);
                if (w1 < 0 || (w1 == 0 && !own1)) continue;
                const double w2 = canonical_edge(mesh, f[0], f[1], x, y);
                if (w2 < 0 || (w2 == 0 && !own2)) continue;
                const double z = (w0 * a.z() + w1 * b.z() + w2 * c.z()) / (w0 + w1 + w2);
                visit(i, j, std::clamp(z, -1.0, 1.0), static_cast<int>(t));
            }
        }
    }
}

}  // namespace

DepthMap render_depth(const TriMesh& mesh, const OrthoCamera& cam)
{
    DepthMap depth(cam.width, cam.height);
    rasterize(mesh, cam, [&](int i, int j, double z, int) {
        const std::size_t k = depth.z.index(i, j);
        if (!depth.valid.data[k] || z > depth.z.data[k]) {
            depth.z.data[k] = z;
            depth.valid.data[k] = 1;
        }
    });
    return depth;
}

Image<int> render_triangle_ids(const TriMesh& mesh, const OrthoCamera& cam)
{
    Image<int> ids(cam.width, cam.height, -1);
    Image<double> zbuf(cam.width, cam.height, -std::numeric_limits<double>::infinity());
    rasterize(mesh, cam, [&](int i, int j, double z, int t) {
        const std::size_t k = ids.index(i, j);
        if (ids.data[k] < 0 || z > zbuf.data[k]) {
            zbuf.data[k] = z;
            ids.data[k] = t;
        }
    });
    return ids;
}

NormalMap normal_from_depth(const DepthMap& depth, const OrthoCamera& cam)
{
    const int W = depth.width(), H = depth.height();
    NormalMap out(W, H);
    const double px = 2.0 / cam.width, py = 2.0 / cam.height;
    for (int j = 0; j < H; ++j) {
        for (int i = 0; i < W; ++i) {
            if (!depth.ok(i, j)) continue;
            const double z = depth.z.at(i, j);
            const bool l = depth.ok(i - 1, j), r = depth.ok(i + 1, j);
            const bool u = depth.ok(i, j - 1), d = depth.ok(i, j + 1);
            double dzdx = 0, dzdy = 0;
            if (l && r) dzdx = (depth.z.at(i + 1, j) - depth.z.at(i - 1, j)) / (2 * px);
            else if (r) dzdx = (depth.z.at(i + 1, j) - z) / px;
            else if (l) dzdx = (z - depth.z.at(i - 1, j)) / px;
            // row index grows downward, y upward
            if (u && d) dzdy = (depth.z.at(i, j - 1) - depth.z.at(i, j + 1)) / (2 * py);
            else if (u) dzdy = (depth.z.at(i, j - 1) - z) / py;
            else if (d) dzdy = (z - depth.z.at(i, j + 1)) / py;
            out.n.at(i, j) = Vec3(-dzdx, -dzdy, 1.0).normalized();
            out.valid.at(i, j) = 1;
        }
    }
    return out;
}

NormalMap render_normal_preview(const DepthMap& depth, const OrthoCamera& cam) { return normal_from_depth(depth, cam); }

namespace {

using Gray = Image<double>;

double sample_clamped(const Gray& img, double x, double y)
{
    x = std::clamp(x, 0.0, img.width - 1.0);
    y = std::clamp(y, 0.0, img.height - 1.0);
    const int i0 = std::min(static_cast<int>(x), img.width - 1);
    const int j0 = std::min(static_cast<int>(y), img.height - 1);
    const int i1 = std::min(i0 + 1, img.width - 1);
    const int j1 = std::min(j0 + 1, img.height - 1);
    const double tx = x - i0, ty = y - j0;
    return (1 - ty) * ((1 - tx) * img.at(i0, j0) + tx * img.at(i1, j0)) +
           ty * ((1 - tx) * img.at(i0, j1) + tx * img.at(i1, j1));
}

Gray downsample(const Gray& img)
{
    Gray out((img.width + 1) / 2, (img.height + 1) / 2);
    for (int j = 0; j < out.height; ++j)
        for (int i = 0; i < out.width; ++i) {
            double sum = 0;
            int n = 0;
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di)
                    if (img.contains(2 * i + di, 2 * j + dj)) {
                        sum += img.at(2 * i + di, 2 * j + dj);
                        ++n;
                    }
            out.at(i, j) = sum / n;
        }
    return out;
}

FlowField upsample(const FlowField& flow, int w, int h)
{
    Gray fx(flow.width, flow.height), fy(flow.width, flow.height);
    for (std::size_t k = 0; k < flow.size(); ++k) {
        fx.data[k] = flow.data[k].x();
        fy.data[k] = flow.data[k].y();
    }
    const double sx = static_cast<double>(flow.width) / w, sy = static_cast<double>(flow.height) / h;
    FlowField out(w, h, Vec2::Zero());
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            const double x = (i + 0.5) * sx - 0.5, y = (j + 0.5) * sy - 0.5;
            out.at(i, j) = Vec2(sample_clamped(fx, x, y) / sx, sample_clamped(fy, x, y) / sy);
        }
    return out;
}

void gradient(const Gray& img, Gray& gx, Gray& gy)
{
    gx = Gray(img.width, img.height);
    gy = Gray(img.width, img.height);
    for (int j = 0; j < img.height; ++j)
        for (int i = 0; i < img.width; ++i) {
            const int il = std::max(i - 1, 0), ir = std::min(i + 1, img.width - 1);
            const int ju = std::max(j - 1, 0), jd = std::min(j + 1, img.height - 1);
            gx.at(i, j) = ir > il ? (img.at(ir, j) - img.at(il, j)) / (ir - il) : 0.0;
            gy.at(i, j) = jd > ju ? (img.at(i, jd) - img.at(i, ju)) / (jd - ju) : 0.0;
        }
}

void horn_schunck_level(const Gray& src, const Gray& dst, const Gray& weight, FlowField& flow, const FlowOptions& opt)
{
    const int W = src.width, H = src.height;
    const std::size_t N = static_cast<std::size_t>(W) * H;
    const double a2 = opt.alpha * opt.alpha;
    const double omega = opt.relaxation;
    const int warps = std::max(1, opt.warps_per_level);
    Gray dgx, dgy, wgx, wgy;
    gradient(dst, dgx, dgy);
    std::vector<double> u(N), v(N), gx(N), gy(N), inv(N), c0(N);
    for (std::size_t k = 0; k < N; ++k) {
        u[k] = flow.data[k].x();
        v[k] = flow.data[k].y();
    }
    for (int w = 0; w < warps; ++w) {
        const int iterations = opt.iterations / warps + (w < opt.iterations % warps ? 1 : 0);
        Gray warped(W, H);
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i) {
                const std::size_t k = static_cast<std::size_t>(j) * W + i;
                warped.data[k] = sample_clamped(src, i + u[k], j + v[k]);
            }
        gradient(warped, wgx, wgy);
        // linearized at (u0, v0): residual = gx u + gy v + c0
        for (std::size_t k = 0; k < N; ++k) {
            // data term weighted by `weight`: scale the residual by its square root
            const double s = weight.empty() ? 1.0 : std::sqrt(weight.data[k]);
            gx[k] = s * 0.5 * (wgx.data[k] + dgx.data[k]);
            gy[k] = s * 0.5 * (wgy.data[k] + dgy.data[k]);
            inv[k] = 1.0 / (a2 + gx[k] * gx[k] + gy[k] * gy[k]);
            c0[k] = s * (warped.data[k] - dst.data[k]) - gx[k] * u[k] - gy[k] * v[k];
        }
        const auto update = [&](std::size_t k, double au, double av) {
            const double t = (gx[k] * au + gy[k] * av + c0[k]) * inv[k];
            u[k] += omega * (au - gx[k] * t - u[k]);
            v[k] += omega * (av - gy[k] * t - v[k]);
        };
        const auto update_border = [&](int i, int j) {
            const std::size_t k = static_cast<std::size_t>(j) * W + i;
            double su = 0, sv = 0;
            int n = 0;
            const auto add = [&](std::size_t q) {
                su += u[q];
                sv += v[q];
                ++n;
            };
            if (i > 0) add(k - 1);
            if (i + 1 < W) add(k + 1);
            if (j > 0) add(k - W);
            if (j + 1 < H) add(k + W);
            if (n) update(k, su / n, sv / n);
        };
        // red-black ordering: no dependency between updates of one colour
        for (int iter = 0; iter < iterations; ++iter) {
            for (int colour = 0; colour < 2; ++colour) {
                for (int j = 0; j < H; ++j) {
                    const int first = (j + colour) & 1;
                    if (j == 0 || j == H - 1 || W < 3) {
                        for (int i = first; i < W; i += 2) update_border(i, j);
                        continue;
                    }
                    if (first == 0) update_border(0, j);
                    const std::size_t row = static_cast<std::size_t>(j) * W;
                    for (std::size_t k = row + (first == 0 ? 2 : 1); k < row + W - 1; k += 2) {
                        update(k, 0.25 * (u[k - 1] + u[k + 1] + u[k - W] + u[k + W]),
                               0.25 * (v[k - 1] + v[k + 1] + v[k - W] + v[k + W]));
                    }
                    if (((W - 1 + j + colour) & 1) == 0) update_border(W - 1, j);
                }
            }
        }
    }
    for (std::size_t k = 0; k < N; ++k) flow.data[k] = Vec2(u[k], v[k]);
}

}  // namespace

FlowResult estimate_flow(const DepthMap& src, const DepthMap& dst, const FlowOptions& options)
{
    if (!src.z.same_size(dst.z)) throw std::invalid_argument("estimate_flow: size mismatch");
    const int W = src.width(), H = src.height();
    FlowResult result;
    result.flow = FlowField(W, H, Vec2::Zero());

    double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
    bool overlap = false;
    for (std::size_t k = 0; k < src.z.size(); ++k) {
        for (const DepthMap* d : {&src, &dst}) {
            if (!d->valid.data[k]) continue;
            zmin = std::min(zmin, d->z.data[k]);
            zmax = std::max(zmax, d->z.data[k]);
        }
        overlap = overlap || (src.valid.data[k] && dst.valid.data[k]);
    }
    if (!overlap) {
        result.disjoint = true;
        return result;
    }
    // valid depth -> [64, 255], background 0, one shared mapping for both maps
    const double range = std::max(zmax - zmin, 1e-9);
    const auto intensity = [&](const DepthMap& d) {
        Gray g(W, H, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (d.valid.data[k]) g.data[k] = 64.0 + 191.0 * (d.z.data[k] - zmin) / range;
        return g;
    };
    std::vector<Gray> ps{intensity(src)}, pd{intensity(dst)}, pw{Gray()};
    if (!options.ignore.empty()) {
        if (!options.ignore.same_size(src.z)) throw std::invalid_argument("estimate_flow: ignore mask size mismatch");
        pw[0] = Gray(W, H, 1.0);
        for (std::size_t k = 0; k < pw[0].size(); ++k)
            if (options.ignore.data[k]) pw[0].data[k] = 0.0;
    }
    for (int l = 1; l < options.levels; ++l) {
        if (ps.back().width < 8 || ps.back().height < 8) break;
        ps.push_back(downsample(ps.back()));
        pd.push_back(downsample(pd.back()));
        pw.push_back(pw.back().empty() ? Gray() : downsample(pw.back()));
    }
    FlowField flow(ps.back().width, ps.back().height, Vec2::Zero());
    for (int l = static_cast<int>(ps.size()) - 1; l >= 0; --l) {
        if (flow.width != ps[l].width || flow.height != ps[l].height) flow = upsample(flow, ps[l].width, ps[l].height);
        horn_schunck_level(ps[l], pd[l], pw[l], flow, options);
    }
    for (std::size_t k = 0; k < flow.size(); ++k)
        if (dst.valid.data[k] && std::isfinite(flow.data[k].x()) && std::isfinite(flow.data[k].y()))
            result.flow.data[k] = flow.data[k];
    return result;
}

DepthMap warp_depth(const DepthMap& depth, const FlowField& flow)
{
    if (!depth.z.same_size(flow)) throw std::invalid_argument("warp_depth: size mismatch");
    const int W = depth.width(), H = depth.height();
    DepthMap out(W, H);
    for (int j = 0; j < H; ++j) {
        for (int i = 0; i < W; ++i) {
            const double x = i + flow.at(i, j).x(), y = j + flow.at(i, j).y();
            if (!(x >= 0 && y >= 0 && x <= W - 1 && y <= H - 1)) continue;
            const int i0 = std::min(static_cast<int>(x), W - 1), j0 = std::min(static_cast<int>(y), H - 1);
            const double tx = x - i0, ty = y - j0;
            const int ii[2] = {i0, std::min(i0 + 1, W - 1)};
            const int jj[2] = {j0, std::min(j0 + 1, H - 1)};
            const double wx[2] = {1 - tx, tx}, wy[2] = {1 - ty, ty};
            double sum = 0;
            bool ok = true;
            for (int b = 0; b < 2 && ok; ++b)
                for (int a = 0; a < 2 && ok; ++a) {
                    const double w = wx[a] * wy[b];
                    if (w == 0) continue;
                    if (!depth.valid.at(ii[a], jj[b])) ok = false;
                    else sum += w * depth.z.at(ii[a], jj[b]);
                }
            if (!ok) continue;
            out.z.at(i, j) = sum;
            out.valid.at(i, j) = 1;
        }
    }
    return out;
}

PointCloud depth_to_points(const DepthMap& depth, const OrthoCamera& cam, int stride, const NormalMap* normals)
{
    if (stride < 1) throw std::invalid_argument("depth_to_points: stride must be >= 1");
    PointCloud cloud;
    for (int j = 0; j < depth.height(); j += stride)
        for (int i = 0; i < depth.width(); i += stride) {
            if (!depth.valid.at(i, j)) continue;
            cloud.points.emplace_back(cam.x_of(i), cam.y_of(j), depth.z.at(i, j));
            if (normals) cloud.normals.push_back(normals->n.at(i, j));
        }
    return cloud;
}

DepthMap fill_region_smooth(const DepthMap& depth, const Mask& region)
{
    if (!region.same_size(depth.z)) throw std::invalid_argument("fill_region_smooth: size mismatch");
    const int W = depth.width(), H = depth.height();
    std::vector<int> unknown(depth.z.size(), -1);
    std::vector<std::size_t> pixels;
    for (std::size_t k = 0; k < depth.z.size(); ++k)
        if (region.data[k] && depth.valid.data[k]) {
            unknown[k] = static_cast<int>(pixels.size());
            pixels.push_back(k);
        }
    DepthMap out = depth;
    if (pixels.empty()) return out;

    // one 5-point Laplacian row per valid pixel with a fully valid stencil
    // that touches an unknown; minimise the sum of squared rows
    const int n = static_cast<int>(pixels.size());
    std::vector<Eigen::Triplet<double>> rows;
    std::vector<double> rhs;
    int r = 0;
    for (int j = 1; j + 1 < H; ++j)
        for (int i = 1; i + 1 < W; ++i) {
            const std::size_t c = depth.z.index(i, j);
            const std::size_t stencil[5] = {c, c - 1, c + 1, c - W, c + W};
            const double weight[5] = {4, -1, -1, -1, -1};
            bool full = true, touches = false;
            for (std::size_t s : stencil) {
                full = full && depth.valid.data[s];
                touches = touches || unknown[s] >= 0;
            }
            if (!full || !touches) continue;
            double known = 0;
            for (int s = 0; s < 5; ++s) {
                if (unknown[stencil[s]] >= 0) rows.emplace_back(r, unknown[stencil[s]], weight[s]);
                else known += weight[s] * depth.z.data[stencil[s]];
            }
            rhs.push_back(-known);
            ++r;
        }
    Eigen::SparseMatrix<double> A(r, n);
    A.setFromTriplets(rows.begin(), rows.end());
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), r);
    // a faint pull toward the input keeps unconstrained pixels determined
    constexpr double kTie = 1e-9;
    Eigen::VectorXd z0(n);
    for (int u = 0; u < n; ++u) z0[u] = depth.z.data[pixels[u]];
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    const Eigen::SparseMatrix<double> N = Eigen::SparseMatrix<double>(A.transpose() * A) + kTie * I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(N);
    if (solver.info() != Eigen::Success) throw std::runtime_error("fill_region_smooth: factorization failed");
    const Eigen::VectorXd x = solver.solve(A.transpose() * b + kTie * z0);
    for (int u = 0; u < n; ++u) out.z.data[pixels[u]] = x[u];
    return out;
}

}  // namespace fsk
