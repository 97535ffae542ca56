#include "gridsec/evaluation.hpp"

#include <stdexcept>

#include "gridsec/numeric_io.hpp"

namespace gridsec {

int ConfusionMatrix::matrix_index(SecurityClass c) {
    switch (c) {
        case SecurityClass::Alarm: return 0;
        case SecurityClass::Emergency1: return 1;
        case SecurityClass::Emergency2: return 2;
        case SecurityClass::Normal: return 3;
    }
    throw std::logic_error("bad class");
}

SecurityClass ConfusionMatrix::class_at(int matrix_index) {
    static constexpr std::array<SecurityClass, kClasses> order = {SecurityClass::Alarm, SecurityClass::Emergency1,
                                                                  SecurityClass::Emergency2, SecurityClass::Normal};
    return order.at(static_cast<std::size_t>(matrix_index));
}

const std::array<std::string, ConfusionMatrix::kClasses>& ConfusionMatrix::class_names() {
    static const std::array<std::string, kClasses> names = {"alarm", "emergency1", "emergency2", "normal"};
    return names;
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const auto& row : counts)
        for (long long c : row) t += c;
    return t;
}

long long ConfusionMatrix::row_total(int row) const {
    long long t = 0;
    for (long long c : counts[static_cast<std::size_t>(row)]) t += c;
    return t;
}

long long ConfusionMatrix::col_total(int col) const {
    long long t = 0;
    for (const auto& row : counts) t += row[static_cast<std::size_t>(col)];
    return t;
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int i = 0; i < kClasses; ++i) t += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return t;
}

ConfusionMatrix confusion_matrix(const std::vector<SecurityClass>& predictions,
                                 const std::vector<SecurityClass>& truth) {
    if (predictions.size() != truth.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("confusion_matrix: empty input");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++m.counts[static_cast<std::size_t>(ConfusionMatrix::matrix_index(truth[i]))]
                  [static_cast<std::size_t>(ConfusionMatrix::matrix_index(predictions[i]))];
    return m;
}

double accuracy(const ConfusionMatrix& m) {
    const long long total = m.total();
    if (total == 0) throw std::invalid_argument("accuracy: empty matrix");
    return static_cast<double>(m.trace()) / static_cast<double>(total);
}

double kappa(const ConfusionMatrix& m) {
    const long long total = m.total();
    if (total == 0) throw std::invalid_argument("kappa: empty matrix");
    double expected = 0.0;
    for (int c = 0; c < ConfusionMatrix::kClasses; ++c)
        expected += static_cast<double>(m.row_total(c)) * static_cast<double>(m.col_total(c));
    expected /= static_cast<double>(total) * static_cast<double>(total);
    if (expected >= 1.0) throw std::domain_error("kappa undefined: expected accuracy is 1 (single-class data)");
    return (accuracy(m) - expected) / (1.0 - expected);
}

std::array<double, ConfusionMatrix::kClasses> per_class_error(const ConfusionMatrix& m) {
    std::array<double, ConfusionMatrix::kClasses> out{};
    for (int c = 0; c < ConfusionMatrix::kClasses; ++c) {
        const long long row = m.row_total(c);
        out[static_cast<std::size_t>(c)] =
            row == 0 ? -1.0
                     : 1.0 - static_cast<double>(m.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) /
                                 static_cast<double>(row);
    }
    return out;
}

EvaluationReport evaluate(const std::vector<SecurityClass>& predictions, const std::vector<SecurityClass>& truth) {
    EvaluationReport rep;
    rep.matrix = confusion_matrix(predictions, truth);
    rep.observed_accuracy = accuracy(rep.matrix);
    double expected = 0.0;
    const double total = static_cast<double>(rep.matrix.total());
    for (int c = 0; c < ConfusionMatrix::kClasses; ++c)
        expected += static_cast<double>(rep.matrix.row_total(c)) * static_cast<double>(rep.matrix.col_total(c));
    rep.expected_accuracy = expected / (total * total);
    rep.kappa = kappa(rep.matrix);
    rep.per_class_error = per_class_error(rep.matrix);
    return rep;
}

std::string format_report(const EvaluationReport& report) {
    std::string out;
    out += "confusion matrix (rows = actual, cols = predicted)\n";
    out += "            ";
    for (const auto& name : ConfusionMatrix::class_names()) out += " " + name + std::string(11 - name.size(), ' ');
    out += " class error\n";
    for (int r = 0; r < ConfusionMatrix::kClasses; ++r) {
        const auto& name = ConfusionMatrix::class_names()[static_cast<std::size_t>(r)];
        out += name + std::string(12 - name.size(), ' ');
        for (int c = 0; c < ConfusionMatrix::kClasses; ++c) {
            auto s = std::to_string(report.matrix.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            out += " " + s + std::string(s.size() < 11 ? 11 - s.size() : 1, ' ');
        }
        const double err = report.per_class_error[static_cast<std::size_t>(r)];
        out += err < 0 ? " n/a" : " " + format_fixed(err, 2);
        out += "\n";
    }
    out += "accuracy " + format_fixed(report.observed_accuracy * 100.0, 2) + "%  kappa " +
           format_fixed(report.kappa * 100.0, 2) + "%\n";
    return out;
}

}  // namespace gridsec
