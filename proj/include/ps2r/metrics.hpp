#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ps2r {

// C x C counts; entry (t, p) = instances of true class t predicted as p.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::uint64_t> counts; // row-major, truth x prediction

    explicit ConfusionMatrix(std::size_t c = 0) : num_classes(c), counts(c * c, 0) {}

    std::uint64_t& at(std::size_t t, std::size_t p) { return counts[t * num_classes + p]; }
    std::uint64_t at(std::size_t t, std::size_t p) const { return counts[t * num_classes + p]; }
    std::uint64_t total() const;
    void add(std::size_t truth, std::size_t pred); // throws on index >= C
};

ConfusionMatrix accumulate(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                           std::size_t num_classes);

// trace / total. Throws std::invalid_argument on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

// Support-weighted mean of per-class F1 (classes with zero support carry
// zero weight; F1 is 0 when precision + recall is 0).
double weighted_f1(const ConfusionMatrix& cm);

// Multiclass Matthews correlation (the R_K statistic); 0 when the
// denominator vanishes.
double mcc(const ConfusionMatrix& cm);

// Per-class accuracy diag/row-sum (0 for empty classes).
std::vector<double> class_accuracy(const ConfusionMatrix& cm);

// CSV with a header row of class names; one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names);

// CSV "class,accuracy" rows.
std::string class_accuracy_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names);

} // namespace ps2r
