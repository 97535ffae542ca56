#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridsec/security_index.hpp"

namespace gridsec {

// Confusion counts with rows = actual, columns = predicted. The display
// order is [alarm, emergency1, emergency2, normal].
struct ConfusionMatrix {
    static constexpr int kClasses = 4;
    std::array<std::array<long long, kClasses>, kClasses> counts{};

    static int matrix_index(SecurityClass c);
    static SecurityClass class_at(int matrix_index);
    static const std::array<std::string, kClasses>& class_names();

    long long total() const;
    long long row_total(int row) const;
    long long col_total(int col) const;
    long long trace() const;
};

ConfusionMatrix confusion_matrix(const std::vector<SecurityClass>& predictions,
                                 const std::vector<SecurityClass>& truth);

// observed accuracy O = trace / total
double accuracy(const ConfusionMatrix& m);

// chance-corrected agreement k = (O - E) / (1 - E) with
// E = sum_c row_c * col_c / total^2. Throws when E = 1.
double kappa(const ConfusionMatrix& m);

// 1 - diagonal/row_total per class (display order); -1 for empty rows
std::array<double, ConfusionMatrix::kClasses> per_class_error(const ConfusionMatrix& m);

struct EvaluationReport {
    ConfusionMatrix matrix;
    double observed_accuracy = 0.0;
    double expected_accuracy = 0.0;
    double kappa = 0.0;
    std::array<double, ConfusionMatrix::kClasses> per_class_error{};
};

EvaluationReport evaluate(const std::vector<SecurityClass>& predictions, const std::vector<SecurityClass>& truth);

// human-readable table, percent values with 2 decimals
std::string format_report(const EvaluationReport& report);

}  // namespace gridsec
