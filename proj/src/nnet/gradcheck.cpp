#include "nmtlab/nnet/gradcheck.hpp"

#include "nmtlab/rng.hpp"
#include "nmtlab/subword.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nmtlab::nnet {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(ParamStore& params, const std::function<double()>& loss_with_grad, const LossProbe& loss,
                           const GradCheckOptions& options) {
    loss_with_grad();
    std::vector<Mat> analytic;
    for (int i = 0; i < static_cast<int>(params.size()); ++i) analytic.push_back(params.grad(i));

    // (tensor, flat index) pairs
    std::set<std::pair<int, long>> coords;
    const long total = static_cast<long>(params.num_scalars());
    if (static_cast<std::size_t>(total) <= options.min_coordinates) {
        for (int i = 0; i < static_cast<int>(params.size()); ++i)
            for (long j = 0; j < params.value(i).size(); ++j) coords.insert({i, j});
    } else {
        Rng rng(options.seed);
        for (int i = 0; i < static_cast<int>(params.size()); ++i)
            coords.insert({i, static_cast<long>(rng.below(static_cast<std::uint64_t>(params.value(i).size())))});
        while (coords.size() < options.min_coordinates) {
            long flat = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
            int i = 0;
            while (flat >= params.value(i).size()) flat -= params.value(i++).size();
            coords.insert({i, flat});
        }
    }

    std::vector<unsigned char> base_signs, up_signs, down_signs;
    loss(&base_signs);

    GradCheckResult r;
    r.coordinates = coords.size();
    for (const auto& [i, j] : coords) {
        double& x = params.value(i).data()[j];
        const double saved = x;
        double h = options.step_size;
        double numeric = 0.0;
        for (int attempt = 0;; ++attempt) {
            up_signs.clear();
            down_signs.clear();
            x = saved + h;
            const long double up = loss(&up_signs);
            x = saved - h;
            const long double down = loss(&down_signs);
            x = saved;
            numeric = static_cast<double>((up - down) / (2.0L * h));
            if ((up_signs == base_signs && down_signs == base_signs) || attempt == options.max_halvings) break;
            if (attempt == 0) ++r.halved;
            h *= 0.5;
        }
        const double a = analytic[static_cast<std::size_t>(i)].data()[j];
        const double err = relative_error(a, numeric);
        if (r.worst_index < 0 || err > r.max_relative_error) {
            r.max_relative_error = err;
            r.worst_parameter = params.name(i);
            r.worst_index = j;
            r.analytic = a;
            r.numeric = numeric;
        }
    }
    return r;
}

GradCheckResult grad_check(const ModelConfig& config, ParamStore& params, const std::vector<Example>& batch,
                           const GradCheckOptions& options) {
    return grad_check(
        params, [&] { return loss_and_grad(config, params, batch); },
        [&](std::vector<unsigned char>* signs) {
            ForwardOptions fo;
            fo.relu_signs = signs;
            const ForwardResult fr = forward(config, params, batch, fo);
            long double total = 0.0L;
            long tokens = 0;
            for (std::size_t e = 0; e < batch.size(); ++e) {
                std::vector<int> targets;
                for (int id : batch[e].tgt)
                    if (id != subword::Vocab::kPad) targets.push_back(id);
                targets.push_back(subword::Vocab::kEos);
                const Mat& z = fr.logits[e];
                for (Eigen::Index row = 0; row < z.rows(); ++row) {
                    const long double mx = z.row(row).maxCoeff();
                    long double sum = 0.0L;
                    for (Eigen::Index col = 0; col < z.cols(); ++col) sum += std::exp(z(row, col) - mx);
                    total += mx + std::log(sum) - z(row, targets[static_cast<std::size_t>(row)]);
                }
                tokens += static_cast<long>(targets.size());
            }
            return total / tokens;
        },
        options);
}

} // namespace nmtlab::nnet
