#include "morphopt/manifold.hpp"

#include <cmath>

#include "json.hpp"
#include "morphopt/errors.hpp"
#include "morphopt/io_util.hpp"
#include "morphopt/kernels.hpp"

namespace morphopt {

namespace {

// layer sizes of one path: dims[0] -> dims[1] -> ... -> dims.back()
std::vector<Layer> make_path(const std::vector<int>& dims, Rng& rng) {
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.W = Mat(dims[i + 1], dims[i]);
        l.b.assign(static_cast<std::size_t>(dims[i + 1]), 0.0);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        for (auto& w : l.W.a) w = rng.uniform(-bound, bound);
        layers.push_back(std::move(l));
    }
    return layers;
}

std::vector<Layer> zero_like(const std::vector<Layer>& layers) {
    std::vector<Layer> out;
    out.reserve(layers.size());
    for (const auto& l : layers) {
        Layer g;
        g.W = Mat(l.W.rows, l.W.cols);
        g.b.assign(l.b.size(), 0.0);
        out.push_back(std::move(g));
    }
    return out;
}

// forward through one path; hidden layers tanh, last layer linear.
// h[0] is the input, h[i] the activation after layer i.
std::vector<Vec> forward_path(const std::vector<Layer>& layers, const Vec& input) {
    std::vector<Vec> h;
    h.reserve(layers.size() + 1);
    h.push_back(input);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        Vec a(static_cast<std::size_t>(l.W.rows));
        linalg::gemv(l.W, h.back().data(), a.data());
        for (int r = 0; r < l.W.rows; ++r) {
            a[static_cast<std::size_t>(r)] += l.b[static_cast<std::size_t>(r)];
        }
        if (i + 1 < layers.size()) {
            for (auto& v : a) v = std::tanh(v);
        }
        h.push_back(std::move(a));
    }
    return h;
}

// standard backward through a path given d(loss)/d(output); returns
// d(loss)/d(input). h is the forward cache from forward_path.
Vec backward_path(const std::vector<Layer>& layers, const std::vector<Vec>& h, Vec delta,
                  std::vector<Layer>& g) {
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const Vec& input = h[ui];
        linalg::ger(g[ui].W, 1.0, delta.data(), input.data());
        linalg::axpy(1.0, delta.data(), g[ui].b.data(), delta.size());
        Vec prev(input.size(), 0.0);
        linalg::gemv_t_add(layers[ui].W, delta.data(), prev.data());
        if (i > 0) {
            // every non-input activation below the top of the path is a tanh
            kernels::table().dtanh_mul(h[ui].data(), prev.data(), prev.data(), prev.size());
        }
        delta = std::move(prev);
    }
    return delta;
}

// caches of one tangent pass through the decoder
struct TangentCache {
    std::vector<Vec> t;  // pre-activation tangents per layer
    std::vector<Vec> s;  // post-dtanh tangents per layer (s.back() = J column)
};

TangentCache tangent_forward(const std::vector<Layer>& layers, const std::vector<Vec>& h,
                             const Vec& direction) {
    TangentCache c;
    Vec cur = direction;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        Vec t(static_cast<std::size_t>(l.W.rows));
        linalg::gemv(l.W, cur.data(), t.data());
        Vec s;
        if (i + 1 < layers.size()) {
            s.assign(t.size(), 0.0);
            kernels::table().dtanh_mul(h[i + 1].data(), t.data(), s.data(), t.size());
        } else {
            s = t;
        }
        c.t.push_back(std::move(t));
        cur = s;
        c.s.push_back(std::move(s));
    }
    return c;
}

struct IsoSample {
    std::vector<Vec> h;              // primal cache
    std::vector<TangentCache> cols;  // one per latent dimension
    Mat G;                           // latent_dim × latent_dim Gram matrix
    double tr_g = 0.0;
    double tr_g2 = 0.0;
};

IsoSample iso_forward(const AeModel& m, const Vec& z) {
    IsoSample s;
    s.h = forward_path(m.dec, z);
    const int zd = m.latent_dim;
    s.cols.reserve(static_cast<std::size_t>(zd));
    for (int k = 0; k < zd; ++k) {
        Vec e(static_cast<std::size_t>(zd), 0.0);
        e[static_cast<std::size_t>(k)] = 1.0;
        s.cols.push_back(tangent_forward(m.dec, s.h, e));
    }
    s.G = Mat(zd, zd);
    for (int i = 0; i < zd; ++i) {
        const Vec& ji = s.cols[static_cast<std::size_t>(i)].s.back();
        for (int j = i; j < zd; ++j) {
            const Vec& jj = s.cols[static_cast<std::size_t>(j)].s.back();
            const double g = linalg::dot(ji.data(), jj.data(), ji.size());
            s.G(i, j) = g;
            s.G(j, i) = g;
        }
    }
    for (int i = 0; i < zd; ++i) {
        s.tr_g += s.G(i, i);
        for (int j = 0; j < zd; ++j) s.tr_g2 += s.G(i, j) * s.G(i, j);
    }
    return s;
}

// unit latent directions reused across tangent backward passes
const Vec& unit_direction(int zd, int k) {
    thread_local std::vector<Vec> cache;
    if (static_cast<int>(cache.size()) != zd) {
        cache.assign(static_cast<std::size_t>(zd), Vec(static_cast<std::size_t>(zd), 0.0));
        for (int i = 0; i < zd; ++i) {
            cache[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
        }
    }
    return cache[static_cast<std::size_t>(k)];
}

// backward of the iso term for one sample given gbar = d(loss)/dG (symmetric,
// already including batch and weight factors). Accumulates into g.
void iso_backward(const AeModel& m, const IsoSample& sample, const Mat& gbar,
                  std::vector<Layer>& g) {
    const int zd = m.latent_dim;
    const std::size_t L = m.dec.size();

    // J̄ = 2 J Ḡ, column by column
    std::vector<Vec> jbar(static_cast<std::size_t>(zd));
    for (int k = 0; k < zd; ++k) {
        Vec col(sample.cols[0].s.back().size(), 0.0);
        for (int l = 0; l < zd; ++l) {
            linalg::axpy(2.0 * gbar(l, k), sample.cols[static_cast<std::size_t>(l)].s.back().data(),
                         col.data(), col.size());
        }
        jbar[static_cast<std::size_t>(k)] = std::move(col);
    }

    // d̄ accumulators for the hidden layers (entries match h[i+1])
    std::vector<Vec> dbar(L);
    for (std::size_t i = 0; i + 1 < L; ++i) dbar[i].assign(sample.h[i + 1].size(), 0.0);

    // backward through each tangent pass
    for (int k = 0; k < zd; ++k) {
        const TangentCache& c = sample.cols[static_cast<std::size_t>(k)];
        Vec sbar = jbar[static_cast<std::size_t>(k)];
        for (int i = static_cast<int>(L) - 1; i >= 0; --i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            Vec tbar;
            if (ui + 1 < L) {
                // s_i = d_i ⊙ t_i with d_i = 1 - h_{i+1}²
                tbar.assign(sbar.size(), 0.0);
                kernels::table().dtanh_mul(sample.h[ui + 1].data(), sbar.data(), tbar.data(),
                                           sbar.size());
                const auto& t = c.t[ui];
                for (std::size_t r = 0; r < sbar.size(); ++r) dbar[ui][r] += t[r] * sbar[r];
            } else {
                tbar = sbar;
            }
            const Vec& in_tangent = ui == 0 ? unit_direction(zd, k) : c.s[ui - 1];
            linalg::ger(g[ui].W, 1.0, tbar.data(), in_tangent.data());
            if (ui == 0) break;  // the latent direction is constant
            Vec prev(in_tangent.size(), 0.0);
            linalg::gemv_t_add(m.dec[ui].W, tbar.data(), prev.data());
            sbar = std::move(prev);
        }
    }

    // primal chain: d_i = 1 - h_{i+1}² → h̄_{i+1} = -2 h_{i+1} ⊙ d̄_i
    std::vector<Vec> hbar(L + 1);
    for (std::size_t i = 0; i <= L; ++i) hbar[i].assign(sample.h[i].size(), 0.0);
    for (std::size_t i = 0; i + 1 < L; ++i) {
        for (std::size_t r = 0; r < dbar[i].size(); ++r) {
            hbar[i + 1][r] = -2.0 * sample.h[i + 1][r] * dbar[i][r];
        }
    }
    for (int i = static_cast<int>(L) - 1; i >= 0; --i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        Vec abar;
        if (ui + 1 < L) {
            abar.assign(hbar[ui + 1].size(), 0.0);
            kernels::table().dtanh_mul(sample.h[ui + 1].data(), hbar[ui + 1].data(), abar.data(),
                                       abar.size());
        } else {
            abar = hbar[ui + 1];  // linear output layer: zero by construction
        }
        linalg::ger(g[ui].W, 1.0, abar.data(), sample.h[ui].data());
        linalg::axpy(1.0, abar.data(), g[ui].b.data(), abar.size());
        if (ui == 0) break;
        linalg::gemv_t_add(m.dec[ui].W, abar.data(), hbar[ui].data());
    }
}

}  // namespace

AeModel AeModel::init(int input_dim, int latent_dim, std::vector<int> hidden, Rng& rng) {
    AeModel m;
    m.input_dim = input_dim;
    m.latent_dim = latent_dim;
    m.hidden = std::move(hidden);
    std::vector<int> enc_dims = {input_dim};
    for (int h : m.hidden) enc_dims.push_back(h);
    enc_dims.push_back(latent_dim);
    std::vector<int> dec_dims(enc_dims.rbegin(), enc_dims.rend());
    m.enc = make_path(enc_dims, rng);
    m.dec = make_path(dec_dims, rng);
    return m;
}

Vec encode(const AeModel& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.input_dim) {
        throw DimensionMismatch("encode: expected " + std::to_string(m.input_dim) + " features");
    }
    return forward_path(m.enc, x).back();
}

Vec decode(const AeModel& m, const Vec& z) {
    if (static_cast<int>(z.size()) != m.latent_dim) {
        throw DimensionMismatch("decode: expected latent dimension " +
                                std::to_string(m.latent_dim));
    }
    return forward_path(m.dec, z).back();
}

Mat decoder_jacobian(const AeModel& m, const Vec& z) {
    if (static_cast<int>(z.size()) != m.latent_dim) {
        throw DimensionMismatch("decoder_jacobian: expected latent dimension " +
                                std::to_string(m.latent_dim));
    }
    const std::vector<Vec> h = forward_path(m.dec, z);
    Mat J(m.input_dim, m.latent_dim);
    for (int k = 0; k < m.latent_dim; ++k) {
        Vec e(static_cast<std::size_t>(m.latent_dim), 0.0);
        e[static_cast<std::size_t>(k)] = 1.0;
        const TangentCache c = tangent_forward(m.dec, h, e);
        const Vec& col = c.s.back();
        for (int r = 0; r < m.input_dim; ++r) J(r, k) = col[static_cast<std::size_t>(r)];
    }
    return J;
}

double iso_loss(const AeModel& m, const std::vector<Vec>& z_batch) {
    if (z_batch.empty()) throw DimensionMismatch("iso_loss: empty batch");
    double num = 0.0, tr = 0.0;
    for (const auto& z : z_batch) {
        const IsoSample s = iso_forward(m, z);
        num += s.tr_g2;
        tr += s.tr_g;
    }
    const double inv_m = 1.0 / static_cast<double>(z_batch.size());
    num *= inv_m;
    tr *= inv_m;
    if (tr < 1e-12) throw ZeroJacobian("mean Gram trace is " + std::to_string(tr));
    return num / (tr * tr);
}

std::vector<Vec> augment_latents(const std::vector<Vec>& z, double mix_lo, double mix_hi,
                                 Rng& rng) {
    if (z.size() < 2) throw DimensionMismatch("augment_latents: need at least two points");
    std::vector<Vec> out;
    out.reserve(z.size());
    for (std::size_t m = 0; m < z.size(); ++m) {
        const std::size_t i = rng.uniform_index(z.size());
        const std::size_t j = rng.uniform_index(z.size());
        const double alpha = rng.uniform(mix_lo, mix_hi);
        Vec mixed(z[i].size());
        for (std::size_t d = 0; d < mixed.size(); ++d) {
            mixed[d] = (1.0 - alpha) * z[i][d] + alpha * z[j][d];
        }
        out.push_back(std::move(mixed));
    }
    return out;
}

LossGrads batch_gradients(const AeModel& m, const std::vector<Vec>& batch,
                          const std::vector<Vec>& iso_latents, double iso_weight) {
    if (batch.empty()) throw DimensionMismatch("batch_gradients: empty batch");
    LossGrads out;
    out.enc = zero_like(m.enc);
    out.dec = zero_like(m.dec);

    const double n_features = static_cast<double>(m.input_dim);
    const double bsize = static_cast<double>(batch.size());
    const double mse_scale = 2.0 / (bsize * n_features);

    double sq = 0.0;
    for (const auto& x : batch) {
        const std::vector<Vec> he = forward_path(m.enc, x);
        const std::vector<Vec> hd = forward_path(m.dec, he.back());
        const Vec& y = hd.back();
        sq += linalg::sumsq_diff(y.data(), x.data(), x.size());

        Vec delta(y.size());
        for (std::size_t r = 0; r < y.size(); ++r) delta[r] = mse_scale * (y[r] - x[r]);
        const Vec zbar = backward_path(m.dec, hd, std::move(delta), out.dec);
        backward_path(m.enc, he, zbar, out.enc);
    }
    out.mse = sq / (bsize * n_features);

    if (iso_weight > 0.0 && !iso_latents.empty()) {
        std::vector<IsoSample> samples;
        samples.reserve(iso_latents.size());
        double num = 0.0, tr = 0.0;
        for (const auto& z : iso_latents) {
            samples.push_back(iso_forward(m, z));
            num += samples.back().tr_g2;
            tr += samples.back().tr_g;
        }
        const double inv_m = 1.0 / static_cast<double>(iso_latents.size());
        num *= inv_m;
        tr *= inv_m;
        if (tr < 1e-12) throw ZeroJacobian("mean Gram trace vanished");
        out.iso = num / (tr * tr);

        // dL/dG_b = w · [ (2/M) G_b / tr² − (2 num / M tr³) I ]
        const double ca = iso_weight * 2.0 * inv_m / (tr * tr);
        const double cb = iso_weight * 2.0 * num * inv_m / (tr * tr * tr);
        for (const auto& s : samples) {
            Mat gbar(m.latent_dim, m.latent_dim);
            for (int i = 0; i < m.latent_dim; ++i) {
                for (int j = 0; j < m.latent_dim; ++j) {
                    gbar(i, j) = ca * s.G(i, j) - (i == j ? cb : 0.0);
                }
            }
            iso_backward(m, s, gbar, out.dec);
        }
    }
    return out;
}

double eval_mse(const AeModel& m, const std::vector<Vec>& dataset) {
    double sum = 0.0;
    for (const auto& x : dataset) {
        const Vec y = decode(m, encode(m, x));
        sum += linalg::sumsq_diff(y.data(), x.data(), x.size());
    }
    return sum / (static_cast<double>(dataset.size()) * static_cast<double>(m.input_dim));
}

TrainResult train(const std::vector<Vec>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw DimensionMismatch("train: empty dataset");
    const int n_features = static_cast<int>(dataset[0].size());

    Rng rng(cfg.seed);
    AeModel model = AeModel::init(n_features, cfg.latent_dim, cfg.hidden, rng);

    std::vector<Layer> enc_m = zero_like(model.enc), dec_m = zero_like(model.dec);
    std::vector<Layer> enc_v = zero_like(model.enc), dec_v = zero_like(model.dec);

    const auto& kt = kernels::table();
    long long t_step = 0;

    auto adam_path = [&](std::vector<Layer>& layers, const std::vector<Layer>& g,
                         std::vector<Layer>& mm, std::vector<Layer>& vv, double c1, double c2) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            kt.adam_step(layers[i].W.a.data(), g[i].W.a.data(), mm[i].W.a.data(),
                         vv[i].W.a.data(), layers[i].W.a.size(), cfg.lr, cfg.adam_beta1,
                         cfg.adam_beta2, cfg.adam_eps, c1, c2);
            kt.adam_step(layers[i].b.data(), g[i].b.data(), mm[i].b.data(), vv[i].b.data(),
                         layers[i].b.size(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                         c1, c2);
        }
    };

    TrainResult result;
    result.history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(dataset.size());
        double epoch_mse = 0.0, epoch_iso = 0.0;
        int n_batches = 0;

        for (std::size_t start = 0; start < perm.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end =
                std::min(perm.size(), start + static_cast<std::size_t>(cfg.batch));
            std::vector<Vec> batch;
            batch.reserve(end - start);
            for (std::size_t bi = start; bi < end; ++bi) batch.push_back(dataset[perm[bi]]);

            std::vector<Vec> iso_latents;
            if (cfg.iso_weight > 0.0) {
                std::vector<Vec> encoded;
                encoded.reserve(batch.size());
                for (const auto& x : batch) encoded.push_back(encode(model, x));
                iso_latents = encoded.size() >= 2
                                  ? augment_latents(encoded, cfg.mix_lo, cfg.mix_hi, rng)
                                  : encoded;
            }

            const LossGrads g = batch_gradients(model, batch, iso_latents, cfg.iso_weight);

            ++t_step;
            const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t_step));
            const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t_step));
            adam_path(model.enc, g.enc, enc_m, enc_v, c1, c2);
            adam_path(model.dec, g.dec, dec_m, dec_v, c1, c2);

            epoch_mse += g.mse;
            epoch_iso += g.iso;
            ++n_batches;
        }

        EpochStats st;
        st.mse = epoch_mse / n_batches;
        st.iso = epoch_iso / n_batches;
        st.total = st.mse + cfg.iso_weight * st.iso;
        if (!std::isfinite(st.total)) throw NonFiniteLoss("training loss diverged", epoch);
        result.history.push_back(st);
    }

    result.model = std::move(model);
    return result;
}

namespace {

nlohmann::json layer_to_json(const Layer& l) {
    nlohmann::json j;
    j["rows"] = l.W.rows;
    j["cols"] = l.W.cols;
    j["w"] = l.W.a;
    j["b"] = l.b;
    return j;
}

Layer layer_from_json(const nlohmann::json& j) {
    Layer l;
    l.W = Mat(j.at("rows").get<int>(), j.at("cols").get<int>());
    l.W.a = j.at("w").get<Vec>();
    l.b = j.at("b").get<Vec>();
    if (l.W.a.size() != static_cast<std::size_t>(l.W.rows) * static_cast<std::size_t>(l.W.cols)) {
        throw SchemaError("checkpoint layer size mismatch");
    }
    return l;
}

}  // namespace

std::string model_to_json(const AeModel& m, const TrainConfig& cfg) {
    nlohmann::json j;
    j["input_dim"] = m.input_dim;
    j["latent_dim"] = m.latent_dim;
    j["hidden"] = m.hidden;
    for (const auto& l : m.enc) j["enc"].push_back(layer_to_json(l));
    for (const auto& l : m.dec) j["dec"].push_back(layer_to_json(l));
    j["config"] = {{"lr", cfg.lr},
                   {"epochs", cfg.epochs},
                   {"batch", cfg.batch},
                   {"iso_weight", cfg.iso_weight},
                   {"mix_lo", cfg.mix_lo},
                   {"mix_hi", cfg.mix_hi},
                   {"seed", cfg.seed},
                   {"adam_beta1", cfg.adam_beta1},
                   {"adam_beta2", cfg.adam_beta2},
                   {"adam_eps", cfg.adam_eps}};
    return j.dump(2);
}

AeModel model_from_json(const std::string& text, TrainConfig* cfg_out) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint parse failure: ") + e.what());
    }
    AeModel m;
    try {
        m.input_dim = j.at("input_dim").get<int>();
        m.latent_dim = j.at("latent_dim").get<int>();
        m.hidden = j.at("hidden").get<std::vector<int>>();
        for (const auto& l : j.at("enc")) m.enc.push_back(layer_from_json(l));
        for (const auto& l : j.at("dec")) m.dec.push_back(layer_from_json(l));
        if (cfg_out && j.contains("config")) {
            const auto& c = j["config"];
            cfg_out->lr = c.value("lr", cfg_out->lr);
            cfg_out->epochs = c.value("epochs", cfg_out->epochs);
            cfg_out->batch = c.value("batch", cfg_out->batch);
            cfg_out->iso_weight = c.value("iso_weight", cfg_out->iso_weight);
            cfg_out->mix_lo = c.value("mix_lo", cfg_out->mix_lo);
            cfg_out->mix_hi = c.value("mix_hi", cfg_out->mix_hi);
            cfg_out->seed = c.value("seed", cfg_out->seed);
            cfg_out->latent_dim = m.latent_dim;
            cfg_out->hidden = m.hidden;
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint schema failure: ") + e.what());
    }
    return m;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    CsvWriter csv;
    csv.row({"epoch", "mse", "iso", "total"});
    for (std::size_t i = 0; i < history.size(); ++i) {
        csv.row({std::to_string(i), format_double(history[i].mse), format_double(history[i].iso),
                 format_double(history[i].total)});
    }
    return csv.str();
}

}  // namespace morphopt
