#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "propgat/harness.hpp"
#include "propgat/rng.hpp"

namespace propgat {

SplitResult stratified_split(const std::vector<Label>& labels, double test_fraction,
                             std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction >= 1.0) {
        throw std::invalid_argument("test_fraction must be in [0, 1)");
    }
    std::vector<int> fake, real;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::fake ? fake : real).push_back(static_cast<int>(i));
    }
    if (fake.empty() || real.empty()) {
        throw std::runtime_error("stratified_split: a class is too small to stratify");
    }

    struct ClassInfo {
        std::vector<int>* ids;
        int take;
        double remainder;
        std::uint64_t shuffle_key;
    };
    const double total_target = std::floor(static_cast<double>(labels.size()) * test_fraction);
    ClassInfo classes[2] = {
        {&fake, 0, 0.0, 0},
        {&real, 0, 0.0, 1},
    };
    int allotted = 0;
    for (auto& c : classes) {
        double exact = static_cast<double>(c.ids->size()) * test_fraction;
        c.take = static_cast<int>(std::floor(exact));
        c.remainder = exact - std::floor(exact);
        allotted += c.take;
    }
    // Top up by largest fractional remainder until the overall floor target
    // is met; ties break toward the larger class.
    int remaining = static_cast<int>(total_target) - allotted;
    std::vector<int> order = {0, 1};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (classes[a].remainder != classes[b].remainder) {
            return classes[a].remainder > classes[b].remainder;
        }
        return classes[a].ids->size() > classes[b].ids->size();
    });
    for (int r = 0; r < remaining; ++r) {
        auto& c = classes[order[r % 2]];
        if (c.take < static_cast<int>(c.ids->size())) ++c.take;
    }

    SplitResult out;
    for (auto& c : classes) {
        RngStream rng(seed, {static_cast<std::uint64_t>(StreamUse::split), c.shuffle_key});
        rng.shuffle(*c.ids);
        for (std::size_t i = 0; i < c.ids->size(); ++i) {
            (static_cast<int>(i) < c.take ? out.test : out.dev).push_back((*c.ids)[i]);
        }
    }
    std::sort(out.dev.begin(), out.dev.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<Fold> stratified_kfold(const std::vector<int>& dev_ids,
                                   const std::vector<Label>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    std::vector<int> fake, real;
    for (int id : dev_ids) {
        if (id < 0 || id >= static_cast<int>(labels.size())) {
            throw std::invalid_argument("dev id out of range");
        }
        (labels[id] == Label::fake ? fake : real).push_back(id);
    }
    if (static_cast<int>(fake.size()) < k || static_cast<int>(real.size()) < k) {
        throw std::runtime_error("stratified_kfold: class count below k (" +
                                 std::to_string(fake.size()) + " fake, " +
                                 std::to_string(real.size()) + " true, k=" + std::to_string(k) +
                                 ")");
    }

    std::vector<std::vector<int>> val(k);
    std::uint64_t class_tag = 0;
    int extra_offset = 0;  // stagger remainders so fold totals differ by at most one
    for (auto* ids : {&fake, &real}) {
        RngStream rng(seed, {static_cast<std::uint64_t>(StreamUse::fold), class_tag++});
        rng.shuffle(*ids);
        const int n = static_cast<int>(ids->size());
        const int base = n / k;
        const int extra = n % k;
        std::vector<int> take(k, base);
        for (int j = 0; j < extra; ++j) ++take[(extra_offset + j) % k];
        extra_offset = (extra_offset + extra) % k;
        int pos = 0;
        for (int f = 0; f < k; ++f) {
            for (int i = 0; i < take[f]; ++i) val[f].push_back((*ids)[pos++]);
        }
    }

    std::vector<Fold> folds(k);
    for (int f = 0; f < k; ++f) {
        std::sort(val[f].begin(), val[f].end());
        folds[f].val_ids = val[f];
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            folds[f].train_ids.insert(folds[f].train_ids.end(), val[g].begin(), val[g].end());
        }
        std::sort(folds[f].train_ids.begin(), folds[f].train_ids.end());
    }
    return folds;
}

}  // namespace propgat
