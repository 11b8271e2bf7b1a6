#include "ps2r/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ps2r {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred) {
    if (truth >= num_classes || pred >= num_classes)
        throw std::invalid_argument("confusion matrix: class index out of range");
    ++at(truth, pred);
}

ConfusionMatrix accumulate(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                           std::size_t num_classes) {
    ConfusionMatrix cm(num_classes);
    for (const auto& [t, p] : pairs) cm.add(t, p);
    return cm;
}

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.num_classes == 0 || cm.total() == 0)
        throw std::invalid_argument("metric on empty confusion matrix");
}

} // namespace

double accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    std::uint64_t trace = 0;
    for (std::size_t c = 0; c < cm.num_classes; ++c) trace += cm.at(c, c);
    return static_cast<double>(trace) / static_cast<double>(cm.total());
}

double weighted_f1(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const std::size_t C = cm.num_classes;
    const double total = static_cast<double>(cm.total());
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        std::uint64_t support = 0, predicted = 0;
        for (std::size_t j = 0; j < C; ++j) {
            support += cm.at(c, j);
            predicted += cm.at(j, c);
        }
        if (support == 0) continue; // zero weight
        const double tp = static_cast<double>(cm.at(c, c));
        const double precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
        const double recall = tp / static_cast<double>(support);
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        sum += static_cast<double>(support) / total * f1;
    }
    return sum;
}

double mcc(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const std::size_t C = cm.num_classes;
    const double s = static_cast<double>(cm.total());
    double c_trace = 0.0, sum_pt = 0.0, sum_pp = 0.0, sum_tt = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
        c_trace += static_cast<double>(cm.at(k, k));
        double t_k = 0.0, p_k = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            t_k += static_cast<double>(cm.at(k, j));
            p_k += static_cast<double>(cm.at(j, k));
        }
        sum_pt += p_k * t_k;
        sum_pp += p_k * p_k;
        sum_tt += t_k * t_k;
    }
    const double denom2 = (s * s - sum_pp) * (s * s - sum_tt);
    if (denom2 <= 0.0) return 0.0;
    return (c_trace * s - sum_pt) / std::sqrt(denom2);
}

std::vector<double> class_accuracy(const ConfusionMatrix& cm) {
    std::vector<double> acc(cm.num_classes, 0.0);
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
        std::uint64_t support = 0;
        for (std::size_t j = 0; j < cm.num_classes; ++j) support += cm.at(c, j);
        if (support > 0)
            acc[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(support);
    }
    return acc;
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
    if (names.size() != cm.num_classes)
        throw std::invalid_argument("confusion_csv: name count mismatch");
    std::string out = "class";
    for (const auto& n : names) out += "," + n;
    out += "\n";
    for (std::size_t t = 0; t < cm.num_classes; ++t) {
        out += names[t];
        for (std::size_t p = 0; p < cm.num_classes; ++p)
            out += "," + std::to_string(cm.at(t, p));
        out += "\n";
    }
    return out;
}

std::string class_accuracy_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
    if (names.size() != cm.num_classes)
        throw std::invalid_argument("class_accuracy_csv: name count mismatch");
    const auto acc = class_accuracy(cm);
    std::string out = "class,accuracy\n";
    char buf[64];
    for (std::size_t c = 0; c < cm.num_classes; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", acc[c]);
        out += names[c] + "," + buf + "\n";
    }
    return out;
}

} // namespace ps2r
