#pragma once

#include <adgame/error.hpp>
#include <adgame/random.hpp>

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace adgame {

/// Fully connected network: `depth` hidden layers of `width` rectifier units
/// and one logistic output unit. All parameters live in one flat vector,
/// layer by layer, each layer as its column-major weight matrix then bias.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::size_t input, std::size_t width, std::size_t depth, std::uint64_t seed)
        : input_(input), width_(width), depth_(depth) {
        if (depth > 0 && width == 0) throw ConfigError("hidden width must be positive");
        params_.resize(static_cast<Eigen::Index>(count_params()));
        Rng rng = make_rng(seed, 0x6e6e696eULL);
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layer_count(); ++l) {
            const auto [in, out] = layer_dims(l);
            const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in, 1)));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (std::size_t i = 0; i < in * out + out; ++i) params_[static_cast<Eigen::Index>(offset + i)] = u(rng);
            offset += in * out + out;
        }
    }

    std::size_t input_size() const noexcept { return input_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t layer_count() const noexcept { return depth_ + 1; }
    std::size_t param_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    Eigen::VectorXd& params() noexcept { return params_; }
    const Eigen::VectorXd& params() const noexcept { return params_; }

    /// Column `j` of `x` is one input; returns one output per column.
    Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd a = x;
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layer_count(); ++l) {
            Eigen::MatrixXd z = affine(l, offset, a);
            a = (l + 1 < layer_count()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
        }
        return logistic(a.row(0));
    }

    double forward_one(const Eigen::VectorXd& x) const { return forward(x)(0); }

    /// Mean squared error of `forward(x)` against `target`; writes d(loss)/d(params).
    double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& target, Eigen::VectorXd& grad) const {
        const auto batch = static_cast<double>(x.cols());
        std::vector<Eigen::MatrixXd> acts{x};
        std::vector<Eigen::MatrixXd> pre;
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layer_count(); ++l) {
            pre.push_back(affine(l, offset, acts.back()));
            acts.push_back(l + 1 < layer_count() ? Eigen::MatrixXd(pre.back().cwiseMax(0.0)) : pre.back());
        }
        const Eigen::RowVectorXd y = logistic(acts.back().row(0));
        const Eigen::RowVectorXd err = y - target;
        const double loss = err.squaredNorm() / batch;

        grad.setZero(params_.size());
        Eigen::MatrixXd delta = ((2.0 / batch) * err.array() * y.array() * (1.0 - y.array())).matrix();
        std::size_t end = param_count();
        for (std::size_t l = layer_count(); l-- > 0;) {
            const auto [in, out] = layer_dims(l);
            const std::size_t start = end - (in * out + out);
            Eigen::Map<Eigen::MatrixXd> gw(grad.data() + start, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            Eigen::Map<Eigen::VectorXd> gb(grad.data() + start + in * out, static_cast<Eigen::Index>(out));
            gw.noalias() = delta * acts[l].transpose();
            gb = delta.rowwise().sum();
            if (l > 0) {
                Eigen::Map<const Eigen::MatrixXd> w(params_.data() + start, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
                Eigen::MatrixXd back = w.transpose() * delta;
                delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
            }
            end = start;
        }
        return loss;
    }

    bool operator==(const Mlp& o) const {
        return input_ == o.input_ && width_ == o.width_ && depth_ == o.depth_ && params_ == o.params_;
    }

private:
    std::pair<std::size_t, std::size_t> layer_dims(std::size_t l) const {
        std::size_t in = l == 0 ? input_ : width_;
        std::size_t out = l + 1 < layer_count() ? width_ : 1;
        return {in, out};
    }

    std::size_t count_params() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < layer_count(); ++l) {
            auto [in, out] = layer_dims(l);
            n += in * out + out;
        }
        return n;
    }

    Eigen::MatrixXd affine(std::size_t l, std::size_t& offset, const Eigen::MatrixXd& a) const {
        const auto [in, out] = layer_dims(l);
        Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offset, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + offset + in * out, static_cast<Eigen::Index>(out));
        offset += in * out + out;
        Eigen::MatrixXd z = w * a;
        z.colwise() += b;
        return z;
    }

    static Eigen::RowVectorXd logistic(const Eigen::RowVectorXd& z) {
        return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }

    std::size_t input_ = 0;
    std::size_t width_ = 0;
    std::size_t depth_ = 0;
    Eigen::VectorXd params_;
};

/// Adaptive-moment gradient descent with the usual defaults.
class Adam {
public:
    explicit Adam(double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
        if (m_.size() != params.size()) {
            m_ = Eigen::VectorXd::Zero(params.size());
            v_ = Eigen::VectorXd::Zero(params.size());
            t_ = 0;
        }
        ++t_;
        m_ = b1_ * m_ + (1.0 - b1_) * grad;
        v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
    }

    std::uint64_t steps() const noexcept { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    std::uint64_t t_ = 0;
    Eigen::VectorXd m_, v_;
};

// Checkpoint layout, all integers and doubles little-endian:
//   "ADVN" | u32 version | u64 input | u64 width | u64 depth | u64 seed |
//   u64 round | u64 param count | f64 params[param count]
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t round = 0;
};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const Mlp& net, const CheckpointMeta& meta) {
    os.write("ADVN", 4);
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((kCheckpointVersion >> (8 * i)) & 0xff));
    detail::put_u64(os, net.input_size());
    detail::put_u64(os, net.width());
    detail::put_u64(os, net.depth());
    detail::put_u64(os, meta.seed);
    detail::put_u64(os, meta.round);
    detail::put_u64(os, net.param_count());
    for (Eigen::Index i = 0; i < net.params().size(); ++i) detail::put_u64(os, std::bit_cast<std::uint64_t>(net.params()[i]));
}

inline Mlp read_checkpoint(std::istream& is, CheckpointMeta* meta = nullptr) {
    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != "ADVN") throw ParseError("not a value-network checkpoint");
    unsigned char vb[4];
    if (!is.read(reinterpret_cast<char*>(vb), 4)) throw ParseError("truncated checkpoint");
    std::uint32_t version = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
    if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
    const auto input = detail::get_u64(is), width = detail::get_u64(is), depth = detail::get_u64(is);
    CheckpointMeta m{detail::get_u64(is), detail::get_u64(is)};
    const auto count = detail::get_u64(is);
    Mlp net(input, width, depth, 0);
    if (count != net.param_count()) throw ParseError("checkpoint parameter count does not match its layer sizes");
    for (Eigen::Index i = 0; i < net.params().size(); ++i) net.params()[i] = std::bit_cast<double>(detail::get_u64(is));
    if (meta) *meta = m;
    return net;
}

inline void save_checkpoint(const std::string& path, const Mlp& net, const CheckpointMeta& meta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_checkpoint(os, net, meta);
    if (!os) throw IoError("failed writing '" + path + "'");
}

inline Mlp load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_checkpoint(is, meta);
}

}  // namespace adgame
