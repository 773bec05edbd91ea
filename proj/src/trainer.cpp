#include "rsl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "rsl/parallel.hpp"
#include "rsl/rng.hpp"

namespace rsl {

void HallOfFame::add(const Candidate& c, const Library& lib) {
    if (!std::isfinite(c.reward)) return;
    if (entries_.size() == capacity_ && c.reward <= entries_.back().reward) return;
    std::string key = render(c.expression, lib, 17);
    for (std::size_t i = 0; i < rendered_keys_.size(); ++i) {
        if (rendered_keys_[i] == key) {
            if (c.reward > entries_[i].reward) {
                entries_[i] = c;
                // re-sort the updated entry into place
                while (i > 0 && entries_[i - 1].reward < entries_[i].reward) {
                    std::swap(entries_[i - 1], entries_[i]);
                    std::swap(rendered_keys_[i - 1], rendered_keys_[i]);
                    --i;
                }
            }
            return;
        }
    }
    std::size_t pos = entries_.size();
    entries_.push_back(c);
    rendered_keys_.push_back(std::move(key));
    while (pos > 0 && entries_[pos - 1].reward < entries_[pos].reward) {
        std::swap(entries_[pos - 1], entries_[pos]);
        std::swap(rendered_keys_[pos - 1], rendered_keys_[pos]);
        --pos;
    }
    if (entries_.size() > capacity_) {
        entries_.pop_back();
        rendered_keys_.pop_back();
    }
}

std::size_t elite_count(std::size_t batch_size, double p) {
    return static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(batch_size) - 1e-12));
}

std::vector<std::size_t> select_elites(const std::vector<Candidate>& batch, const Library& lib,
                                       std::size_t count) {
    std::vector<std::size_t> idx;
    idx.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        if (std::isfinite(batch[i].reward)) idx.push_back(i);
    std::vector<std::string> keys(batch.size());
    auto key_of = [&](std::size_t i) -> const std::string& {
        if (keys[i].empty()) keys[i] = serialize(batch[i].expression, lib);
        return keys[i];
    };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (batch[a].reward != batch[b].reward) return batch[a].reward > batch[b].reward;
        if (batch[a].expression.sequence.size() != batch[b].expression.sequence.size())
            return batch[a].expression.sequence.size() < batch[b].expression.sequence.size();
        const std::string &ka = key_of(a), &kb = key_of(b);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    if (idx.size() > count) idx.resize(count);
    return idx;
}

Trainer::Trainer(const RunConfig& cfg, std::vector<DimensionlessSample> data, int threads)
    : cfg_(cfg),
      lib_(Library::standard(cfg.library)),
      data_(std::move(data)),
      threads_(threads),
      params_(PolicyParams::init(lib_, cfg.hidden_width, cfg.seed, cfg.init_range)),
      first_(FirstTokenDist::uniform(lib_, cfg.constraints)) {
    cfg_.validate();
    features_ = feature_matrix(data_);
    targets_ = target_vector(data_);
    adam_m_.assign(params_.parameter_count(), 0.0);
    adam_v_.assign(params_.parameter_count(), 0.0);
}

FitConfig Trainer::fit_config() const {
    FitConfig fc;
    fc.restarts = cfg_.restarts;
    fc.restart_range = cfg_.restart_range;
    fc.max_iterations = cfg_.max_fit_iterations;
    fc.grad_tol = cfg_.fit_grad_tol;
    fc.seed = cfg_.seed;
    fc.log_life = cfg_.target_transform == "log_life";
    return fc;
}

std::vector<Candidate> Trainer::sample_batch(int epoch_index, std::size_t batch_size) {
    std::vector<SampledSequence> sampled(batch_size);
    parallel_for(batch_size, threads_, [&](std::size_t i) {
        Rng rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(epoch_index), i));
        sampled[i] = sample_sequence(params_, lib_, cfg_.constraints, first_, rng);
    });

    // fit each distinct structure once; duplicates share the result
    std::vector<std::string> keys(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        keys[i] = structure_key(sampled[i].sequence, lib_);
    std::map<std::string, std::size_t> unique_of;  // key -> index in uniques
    std::vector<std::size_t> representative;       // first slot per unique
    std::vector<std::size_t> unique_index(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        auto [it, inserted] = unique_of.try_emplace(keys[i], representative.size());
        if (inserted) representative.push_back(i);
        unique_index[i] = it->second;
    }
    std::vector<FitResult> fits(representative.size());
    const FitConfig fc = fit_config();
    parallel_for(representative.size(), threads_, [&](std::size_t u) {
        Expression st;
        st.sequence = sampled[representative[u]].sequence;
        st.constants.assign(
            static_cast<std::size_t>(count_constants(st.sequence, lib_)), 1.0);
        fits[u] = fit_constants(st, lib_, features_, data_.size(), 4, targets_, fc);
    });

    std::vector<Candidate> batch(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const FitResult& f = fits[unique_index[i]];
        Candidate& c = batch[i];
        c.expression.sequence = sampled[i].sequence;
        c.expression.constants = f.constants;
        c.log_prob = sampled[i].log_prob;
        if (std::isfinite(f.rmse)) {
            c.rmse = f.rmse;
            c.r2 = f.r2;
            c.reward = -f.rmse;
        }
    }
    return batch;
}

void Trainer::policy_update(const std::vector<Candidate>& batch,
                            const std::vector<std::size_t>& elites) {
    if (elites.empty()) return;
    double r_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : elites) r_min = std::min(r_min, batch[i].reward);

    PolicyGrad grad(params_);
    const double inv_n = 1.0 / static_cast<double>(elites.size());
    for (std::size_t i : elites) {
        const double advantage = (batch[i].reward - r_min) * inv_n;
        sequence_logprob_and_grad(params_, batch[i].expression.sequence, lib_, cfg_.constraints,
                                  grad, advantage, cfg_.entropy_coeff * inv_n);
    }
    const double norm = grad.global_norm();
    if (norm > cfg_.grad_clip && norm > 0) grad.scale(cfg_.grad_clip / norm);

    const double lr = cfg_.learning_rate;
    if (cfg_.optimizer == "sgd") {
        for (std::size_t i = 0; i < grad.g.size(); ++i) params_.flat(i) += lr * grad.g[i];
        return;
    }
    // adam (ascent)
    ++adam_t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
    for (std::size_t i = 0; i < grad.g.size(); ++i) {
        adam_m_[i] = b1 * adam_m_[i] + (1 - b1) * grad.g[i];
        adam_v_[i] = b2 * adam_v_[i] + (1 - b2) * grad.g[i] * grad.g[i];
        const double mhat = adam_m_[i] / bc1, vhat = adam_v_[i] / bc2;
        params_.flat(i) += lr * mhat / (std::sqrt(vhat) + eps);
    }
}

Trainer::EpochOutcome Trainer::run_epoch(int epoch_index) {
    const bool augmented = epoch_index < cfg_.n_group;
    const std::size_t batch_size =
        static_cast<std::size_t>(cfg_.n_size) *
        (augmented ? static_cast<std::size_t>(cfg_.augment_factor) : 1);
    const double p = augmented ? cfg_.p1 : cfg_.p2;

    last_batch_ = sample_batch(epoch_index, batch_size);
    EpochOutcome out;
    out.elites = select_elites(last_batch_, lib_, elite_count(batch_size, p));

    for (const Candidate& c : last_batch_) hof_.add(c, lib_);

    out.stats.epoch = epoch_index;
    out.stats.batch_size = batch_size;
    out.stats.n_elite = out.elites.size();
    if (!out.elites.empty()) {
        const Candidate& best = last_batch_[out.elites.front()];
        out.stats.best_rmse = best.rmse;
        out.stats.best_r2 = best.r2;
        out.stats.best_expression = serialize(best.expression, lib_);
        double sum = 0;
        for (std::size_t i : out.elites) sum += last_batch_[i].rmse;
        out.stats.mean_elite_rmse = sum / static_cast<double>(out.elites.size());
    }
    return out;
}

SearchResult Trainer::run_search(const std::function<void(const EpochStats&)>& on_epoch) {
    SearchResult result;
    for (int epoch = 0; epoch < cfg_.n_epoch; ++epoch) {
        EpochOutcome out = run_epoch(epoch);

        std::vector<std::vector<int>> elite_sequences;
        elite_sequences.reserve(out.elites.size());
        for (std::size_t i : out.elites)
            elite_sequences.push_back(last_batch_[i].expression.sequence);
        first_ = update_first_token_dist(elite_sequences, lib_, cfg_.constraints);
        policy_update(last_batch_, out.elites);

        result.stats.push_back(out.stats);
        if (on_epoch) on_epoch(out.stats);
        if (cfg_.stop_r2 > 0 && !hof_.empty() && hof_.best().r2 >= cfg_.stop_r2) break;
    }
    result.hall_of_fame = hof_;
    return result;
}

FitResult refit_structure(const Expression& structure, const Library& lib,
                          std::span<const DimensionlessSample> data, const RunConfig& cfg) {
    Tree t = decode(structure.sequence, lib);
    if (!t.ok()) throw std::invalid_argument("structure does not decode to a complete tree");
    if (count_functions(structure.sequence, lib) > cfg.constraints.l)
        throw std::invalid_argument("structure exceeds the function budget l=" +
                                    std::to_string(cfg.constraints.l));
    if (count_constants(structure.sequence, lib) > cfg.constraints.n_const)
        throw std::invalid_argument("structure exceeds the constant cap N_const=" +
                                    std::to_string(cfg.constraints.n_const));
    FitConfig fc;
    fc.restarts = cfg.restarts;
    fc.restart_range = cfg.restart_range;
    fc.max_iterations = cfg.max_fit_iterations;
    fc.grad_tol = cfg.fit_grad_tol;
    fc.seed = cfg.seed;
    fc.log_life = cfg.target_transform == "log_life";
    if (structure.constants.size() ==
        static_cast<std::size_t>(count_constants(structure.sequence, lib)))
        fc.extra_start = structure.constants;
    auto X = feature_matrix(data);
    auto y = target_vector(data);
    return fit_constants(structure, lib, X, data.size(), 4, y, fc);
}

std::string stats_csv(std::span<const EpochStats> stats) {
    std::string out = "epoch,batch_size,n_elite,best_rmse,mean_elite_rmse,best_r2,best_expression\n";
    char buf[128];
    for (const EpochStats& s : stats) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.17g,%.17g,%.17g,", s.epoch, s.batch_size,
                      s.n_elite, s.best_rmse, s.mean_elite_rmse, s.best_r2);
        out += buf;
        out += "\"" + s.best_expression + "\"\n";
    }
    return out;
}

}  // namespace rsl
