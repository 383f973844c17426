#include "patrol/qnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace patrol {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'T', 'R', 'O', 'L', 'Q', '1'};
constexpr uint32_t kVersion = 1;

void validate_dims(const std::vector<int>& dims) {
    if (dims.size() < 2)
        throw std::invalid_argument("network needs at least an input and an output layer");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("network layer widths must be positive");
}

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " is not finite");
}

// Activations per layer for one backward pass; act[0] is the input.
struct ForwardCache {
    std::vector<std::vector<double>> act;
};

std::vector<double> forward_impl(const QParams& p, std::span<const double> input,
                                 ForwardCache* cache) {
    if (static_cast<int>(input.size()) != p.input_dim())
        throw std::invalid_argument("forward: input size " + std::to_string(input.size()) +
                                    " does not match network input dim " +
                                    std::to_string(p.input_dim()));
    check_finite(input, "forward input");
    std::vector<double> x(input.begin(), input.end());
    if (cache) {
        cache->act.clear();
        cache->act.push_back(x);
    }
    const int layers = p.layer_count();
    for (int l = 0; l < layers; ++l) {
        const int in = p.dims[l], out = p.dims[l + 1];
        const double* w = p.weights[l].data();
        std::vector<double> y(static_cast<size_t>(out));
        for (int o = 0; o < out; ++o) {
            double acc = p.biases[l][o];
            const double* row = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
        if (l + 1 < layers)
            for (double& v : y) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
        x = std::move(y);
        if (cache) cache->act.push_back(x);
    }
    return x;
}

// Accumulates parameter gradients for one sample given d(loss)/d(output).
void backward_impl(const QParams& p, const ForwardCache& cache, std::vector<double> delta,
                   QParams& grads) {
    for (int l = p.layer_count() - 1; l >= 0; --l) {
        const int in = p.dims[l], out = p.dims[l + 1];
        const std::vector<double>& a_in = cache.act[static_cast<size_t>(l)];
        double* gw = grads.weights[l].data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            if (d == 0.0) continue;
            grads.biases[l][o] += d;
            double* row = gw + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) row[i] += d * a_in[static_cast<size_t>(i)];
        }
        if (l == 0) break;
        std::vector<double> prev(static_cast<size_t>(in), 0.0);
        const double* w = p.weights[l].data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            if (d == 0.0) continue;
            const double* row = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev[static_cast<size_t>(i)] += d * row[i];
        }
        // ReLU gate of the hidden activation feeding layer l
        for (int i = 0; i < in; ++i)
            if (cache.act[static_cast<size_t>(l)][static_cast<size_t>(i)] <= 0.0)
                prev[static_cast<size_t>(i)] = 0.0;
        delta = std::move(prev);
    }
}

// --- binary writer/reader, little-endian ---

struct Writer {
    std::vector<uint8_t> out;
    void bytes(const void* p, size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    void u32(uint32_t v) {
        for (int s = 0; s < 4; ++s) out.push_back(static_cast<uint8_t>(v >> (8 * s)));
    }
    void u64(uint64_t v) {
        for (int s = 0; s < 8; ++s) out.push_back(static_cast<uint8_t>(v >> (8 * s)));
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void tensor(const std::vector<double>& t) {
        for (double v : t) f64(v);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

struct Reader {
    std::span<const uint8_t> buf;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("checkpoint truncated at byte " + std::to_string(pos) +
                                     " (need " + std::to_string(n) + " more)");
    }
    void bytes(void* p, size_t n) {
        need(n);
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int s = 0; s < 4; ++s) v |= static_cast<uint32_t>(buf[pos + s]) << (8 * s);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int s = 0; s < 8; ++s) v |= static_cast<uint64_t>(buf[pos + s]) << (8 * s);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void tensor(std::vector<double>& t) {
        for (double& v : t) v = f64();
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

size_t QParams::parameter_count() const {
    size_t n = 0;
    for (int l = 0; l < layer_count(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

QParams QParams::zeros(const std::vector<int>& dims) {
    validate_dims(dims);
    QParams p;
    p.dims = dims;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        p.weights.emplace_back(static_cast<size_t>(dims[l + 1]) * dims[l], 0.0);
        p.biases.emplace_back(static_cast<size_t>(dims[l + 1]), 0.0);
    }
    return p;
}

QParams QParams::he_init(const std::vector<int>& dims, Rng& rng) {
    QParams p = zeros(dims);
    for (int l = 0; l < p.layer_count(); ++l) {
        const double bound = std::sqrt(6.0 / dims[static_cast<size_t>(l)]);
        for (double& w : p.weights[l]) w = rng.uniform_symmetric(bound);
    }
    return p;
}

const std::vector<int>& paper_net_dims() {
    static const std::vector<int> dims = {13, 2048, 1024, 256, 64, 5};
    return dims;
}

const std::vector<int>& desk_net_dims() {
    static const std::vector<int> dims = {13, 128, 64, 5};
    return dims;
}

std::vector<double> forward(const QParams& params, std::span<const double> input) {
    return forward_impl(params, input, nullptr);
}

int masked_argmax(std::span<const double> q, const ActionMask& mask) {
    int best = -1;
    for (int a = 0; a < kNumActions; ++a) {
        if (!mask[static_cast<size_t>(a)]) continue;
        if (best < 0 || q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
    }
    if (best < 0) throw std::invalid_argument("masked_argmax: no feasible action in mask");
    return best;
}

LossGrad loss_and_grad(const QParams& params, const TargetParams& target,
                       std::span<const Transition> batch, double gamma) {
    if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("loss_and_grad: gamma must lie in [0,1)");
    if (!params.same_shape(target))
        throw std::invalid_argument("loss_and_grad: live and target network shapes differ");

    LossGrad out;
    out.grads = QParams::zeros(params.dims);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    ForwardCache cache;
    for (const Transition& t : batch) {
        double y = t.r;
        if (gamma > 0.0) {
            const std::vector<double> q_next_live = forward_impl(params, t.s_next, nullptr);
            const int pick = masked_argmax(q_next_live, t.feasible_next);
            const std::vector<double> q_next_target = forward_impl(target, t.s_next, nullptr);
            y += gamma * q_next_target[static_cast<size_t>(pick)];
        }
        const std::vector<double> q = forward_impl(params, t.s, &cache);
        const size_t u = static_cast<size_t>(t.u);
        const double diff = q[u] - y;
        out.loss += diff * diff * inv_b;
        std::vector<double> delta(q.size(), 0.0);
        delta[u] = 2.0 * diff * inv_b;
        backward_impl(params, cache, std::move(delta), out.grads);
    }
    return out;
}

AdamState AdamState::init(const QParams& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (int l = 0; l < params.layer_count(); ++l) {
        s.m_w.emplace_back(params.weights[l].size(), 0.0);
        s.v_w.emplace_back(params.weights[l].size(), 0.0);
        s.m_b.emplace_back(params.biases[l].size(), 0.0);
        s.v_b.emplace_back(params.biases[l].size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, const AdamState& s, double corr1, double corr2) {
    for (size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        p[i] -= s.lr * (m[i] * corr1) / (std::sqrt(v[i] * corr2) + s.eps);
    }
}

}  // namespace

void optimizer_step(QParams& params, const QParams& grads, AdamState& opt) {
    if (!params.same_shape(grads))
        throw std::invalid_argument("optimizer_step: gradient shapes do not match parameters");
    if (opt.m_w.size() != params.weights.size())
        throw std::invalid_argument("optimizer_step: optimizer state does not match parameters");
    opt.step += 1;
    const double corr1 = 1.0 / (1.0 - std::pow(opt.beta1, static_cast<double>(opt.step)));
    const double corr2 = 1.0 / (1.0 - std::pow(opt.beta2, static_cast<double>(opt.step)));
    for (int l = 0; l < params.layer_count(); ++l) {
        adam_update(params.weights[l], grads.weights[l], opt.m_w[l], opt.v_w[l], opt, corr1, corr2);
        adam_update(params.biases[l], grads.biases[l], opt.m_b[l], opt.v_b[l], opt, corr1, corr2);
    }
}

void hard_update(TargetParams& target, const QParams& params) {
    if (!target.same_shape(params))
        throw std::invalid_argument("hard_update: target shape does not match parameters");
    target.weights = params.weights;
    target.biases = params.biases;
}

std::vector<uint8_t> save_checkpoint(const QParams& params, const AdamState* opt,
                                     const Metadata& metadata) {
    Writer w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u32(static_cast<uint32_t>(params.dims.size()));
    for (int d : params.dims) w.u32(static_cast<uint32_t>(d));
    w.u32(static_cast<uint32_t>(metadata.size()));
    for (const auto& [key, value] : metadata) {
        w.str(key);
        w.str(value);
    }
    w.out.push_back(opt ? 1 : 0);
    for (int l = 0; l < params.layer_count(); ++l) {
        w.tensor(params.weights[l]);
        w.tensor(params.biases[l]);
    }
    if (opt) {
        w.u64(opt->step);
        w.f64(opt->lr);
        w.f64(opt->beta1);
        w.f64(opt->beta2);
        w.f64(opt->eps);
        for (size_t l = 0; l < params.weights.size(); ++l) {
            w.tensor(opt->m_w[l]);
            w.tensor(opt->v_w[l]);
            w.tensor(opt->m_b[l]);
            w.tensor(opt->v_b[l]);
        }
    }
    return std::move(w.out);
}

Checkpoint load_checkpoint(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic)");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const uint32_t n_dims = r.u32();
    if (n_dims < 2 || n_dims > 64) throw std::runtime_error("checkpoint has invalid layer list");
    std::vector<int> dims(n_dims);
    for (uint32_t i = 0; i < n_dims; ++i) dims[i] = static_cast<int>(r.u32());
    Checkpoint ck;
    const uint32_t meta_count = r.u32();
    for (uint32_t i = 0; i < meta_count; ++i) {
        std::string key = r.str();
        ck.metadata[key] = r.str();
    }
    uint8_t has_opt = 0;
    r.bytes(&has_opt, 1);
    ck.params = QParams::zeros(dims);
    for (int l = 0; l < ck.params.layer_count(); ++l) {
        r.tensor(ck.params.weights[l]);
        r.tensor(ck.params.biases[l]);
    }
    if (has_opt) {
        AdamState opt = AdamState::init(ck.params);
        opt.step = r.u64();
        opt.lr = r.f64();
        opt.beta1 = r.f64();
        opt.beta2 = r.f64();
        opt.eps = r.f64();
        for (size_t l = 0; l < ck.params.weights.size(); ++l) {
            r.tensor(opt.m_w[l]);
            r.tensor(opt.v_w[l]);
            r.tensor(opt.m_b[l]);
            r.tensor(opt.v_b[l]);
        }
        ck.opt = std::move(opt);
    }
    if (r.pos != bytes.size())
        throw std::runtime_error("checkpoint has " + std::to_string(bytes.size() - r.pos) +
                                 " trailing bytes");
    return ck;
}

void save_checkpoint_file(const std::string& path, const QParams& params, const AdamState* opt,
                          const Metadata& metadata) {
    const std::vector<uint8_t> bytes = save_checkpoint(params, opt, metadata);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return load_checkpoint(bytes);
}

}  // namespace patrol
