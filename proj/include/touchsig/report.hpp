#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "touchsig/eval.hpp"
#include "touchsig/synth.hpp"

namespace touchsig {

struct EvalReport {
    std::string model;     // "knn" | "ann"
    std::string protocol;  // e.g. "10-fold cross-validation", "70/15/15 split"
    std::uint64_t seed = 0;
    std::size_t folds = 0;  // 0 when no folds were used
    std::string profile;    // keypad used for the digit grid
    ConfusionMatrix confusion;
    std::optional<GuessCurve> guess;
};

/// Newline-delimited records: one summary, one confusion, optionally one
/// guess_curve. Parsed back by parse_report_records.
std::string render_records(const EvalReport& report);
EvalReport parse_report_records(std::string_view text);

/// Aligned text: confusion matrix (columns = actual class, each column sums
/// to 100%), the stage-1 and scroll-direction views for touch actions, the
/// keypad grid of per-digit rates and the guess table for digits.
std::string render_text(const EvalReport& report);

std::string render_confusion_table(const ConfusionMatrix& cm);
std::string render_digit_grid(const ConfusionMatrix& cm, const DeviceProfile& profile);
std::string render_guess_table(const GuessCurve& curve);

/// CSV plot data: rank, average, random-guess baseline, then one column per class.
std::string render_curve_csv(const GuessCurve& curve);

/// Collapses the four scroll directions into one "scroll" class.
ConfusionMatrix stage1_view(const ConfusionMatrix& cm);
/// Scroll rows and columns only.
ConfusionMatrix scroll_view(const ConfusionMatrix& cm);

std::string format_percent(double percent);  // two decimals and a '%'

}  // namespace touchsig
