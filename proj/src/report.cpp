#include "touchsig/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "touchsig/error.hpp"

namespace touchsig {

using nlohmann::json;

namespace {

std::string display_name(const std::string& label) {
    if (label == kScrollClass) return "Scroll";
    try {
        const auto l = Label::parse(label);
        if (l.is_digit()) return std::to_string(l.digit().value);
        switch (l.action()) {
            case TouchAction::Click: return "Click";
            case TouchAction::Hold: return "Hold";
            case TouchAction::ScrollUp: return "Scroll up";
            case TouchAction::ScrollDown: return "Scroll down";
            case TouchAction::ScrollRight: return "Scroll right";
            case TouchAction::ScrollLeft: return "Scroll left";
            case TouchAction::ZoomIn: return "Zoom in";
            case TouchAction::ZoomOut: return "Zoom out";
        }
    } catch (const Error&) {
    }
    return label;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string ordinal(std::size_t rank) {
    static constexpr std::array<const char*, 10> names = {"First", "Second",  "Third",  "Fourth", "Fifth",
                                                          "Sixth", "Seventh", "Eighth", "Ninth",  "Tenth"};
    return rank >= 1 && rank <= names.size() ? names[rank - 1] : "#" + std::to_string(rank);
}

bool all_actions(const std::vector<std::string>& classes) {
    return !classes.empty() && std::all_of(classes.begin(), classes.end(), [](const std::string& c) {
        return c.rfind("action:", 0) == 0;
    });
}

bool all_digits(const std::vector<std::string>& classes) {
    return !classes.empty() && std::all_of(classes.begin(), classes.end(), [](const std::string& c) {
        return c.rfind("digit:", 0) == 0;
    });
}

bool is_scroll_label(const std::string& label) {
    try {
        const auto l = Label::parse(label);
        return l.is_action() && is_scroll(l.action());
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

std::string format_percent(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", percent);
    return buf;
}

std::string render_confusion_table(const ConfusionMatrix& cm) {
    const auto C = cm.classes.size();
    std::size_t width = 9;
    for (const auto& c : cm.classes) width = std::max(width, display_name(c).size() + 2);
    const std::string corner = "Predicted \\ Actual";
    const std::size_t first = std::max(corner.size(), width) + 1;

    std::ostringstream out;
    out << pad(corner, first, true);
    for (const auto& c : cm.classes) out << pad(display_name(c), width);
    out << '\n';
    for (std::size_t p = 0; p < C; ++p) {
        out << pad(display_name(cm.classes[p]), first, true);
        for (std::size_t a = 0; a < C; ++a) out << pad(format_percent(cm.percent(a, p)), width);
        out << '\n';
    }
    out << pad("Total", first, true);
    for (std::size_t a = 0; a < C; ++a) {
        double sum = 0.0;
        for (std::size_t p = 0; p < C; ++p) sum += cm.percent(a, p);
        out << pad(format_percent(sum), width);
    }
    out << '\n';
    return out.str();
}

std::string render_digit_grid(const ConfusionMatrix& cm, const DeviceProfile& profile) {
    const auto rows = static_cast<std::size_t>(profile.keypad_rows);
    const auto cols = static_cast<std::size_t>(profile.keypad_cols);
    std::vector<std::vector<std::string>> grid(rows, std::vector<std::string>(cols, "-"));
    for (int d = 0; d < 10; ++d) {
        const auto label = Label(Digit{d}).str();
        const auto it = std::find(cm.classes.begin(), cm.classes.end(), label);
        std::string cell = std::to_string(d);
        if (it != cm.classes.end()) {
            const auto i = static_cast<std::size_t>(it - cm.classes.begin());
            cell += " (" + format_percent(cm.percent(i, i)) + ")";
        }
        const auto pos = profile.keypad[static_cast<std::size_t>(d)];
        grid[static_cast<std::size_t>(pos.row)][static_cast<std::size_t>(pos.col)] = cell;
    }
    std::size_t width = 0;
    for (const auto& r : grid) {
        for (const auto& c : r) width = std::max(width, c.size());
    }
    width += 2;
    const std::string rule = "+" + [&] {
        std::string s;
        for (std::size_t c = 0; c < cols; ++c) s += std::string(width, '-') + "+";
        return s;
    }();
    std::ostringstream out;
    out << rule << '\n';
    for (const auto& r : grid) {
        out << '|';
        for (const auto& c : r) {
            const auto left = (width - c.size()) / 2;
            out << std::string(left, ' ') << c << std::string(width - c.size() - left, ' ') << '|';
        }
        out << '\n' << rule << '\n';
    }
    out << profile.name << " (Ave. iden. rate: " << format_percent(100.0 * cm.overall_rate()) << ")\n";
    return out.str();
}

std::string render_guess_table(const GuessCurve& curve) {
    std::size_t width = 9;
    std::ostringstream out;
    out << pad("Attempt", 9, true);
    for (const auto& c : curve.classes) out << pad(display_name(c), width);
    out << pad("Average", width + 1) << '\n';
    for (std::size_t r = 0; r < curve.average.size(); ++r) {
        out << pad(ordinal(r + 1), 9, true);
        for (std::size_t c = 0; c < curve.classes.size(); ++c) {
            out << pad(format_percent(100.0 * curve.per_class[c][r]), width);
        }
        out << pad(format_percent(100.0 * curve.average[r]), width + 1) << '\n';
    }
    return out.str();
}

std::string render_curve_csv(const GuessCurve& curve) {
    std::ostringstream out;
    out << "rank,average,random";
    for (const auto& c : curve.classes) out << ',' << c;
    out << '\n';
    const auto C = static_cast<double>(curve.classes.size());
    for (std::size_t r = 0; r < curve.average.size(); ++r) {
        out << (r + 1) << ',' << json(curve.average[r]).dump() << ',' << json(double(r + 1) / C).dump();
        for (std::size_t c = 0; c < curve.classes.size(); ++c) out << ',' << json(curve.per_class[c][r]).dump();
        out << '\n';
    }
    return out.str();
}

ConfusionMatrix stage1_view(const ConfusionMatrix& cm) {
    std::vector<std::string> classes;
    const auto map = [&](const std::string& c) { return is_scroll_label(c) ? std::string(kScrollClass) : c; };
    for (const auto& c : cm.classes) {
        const auto m = map(c);
        if (std::find(classes.begin(), classes.end(), m) == classes.end()) classes.push_back(m);
    }
    // Table order: click, hold, scroll, zoom in, zoom out.
    std::stable_sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
        const auto key = [](const std::string& s) {
            if (s == kScrollClass) return 2.5;
            try {
                return static_cast<double>(Label::parse(s).action());
            } catch (const Error&) {
                return 100.0;
            }
        };
        return key(a) < key(b);
    });
    ConfusionMatrix out(classes);
    for (std::size_t a = 0; a < cm.classes.size(); ++a) {
        for (std::size_t p = 0; p < cm.classes.size(); ++p) {
            out.counts[out.index_of(map(cm.classes[a]))][out.index_of(map(cm.classes[p]))] += cm.counts[a][p];
        }
    }
    return out;
}

ConfusionMatrix scroll_view(const ConfusionMatrix& cm) {
    std::vector<std::string> classes;
    for (const auto& c : cm.classes) {
        if (is_scroll_label(c)) classes.push_back(c);
    }
    ConfusionMatrix out(classes);
    for (const auto& a : classes) {
        for (const auto& p : classes) out.counts[out.index_of(a)][out.index_of(p)] = cm.counts[cm.index_of(a)][cm.index_of(p)];
    }
    return out;
}

std::string render_records(const EvalReport& report) {
    const auto& cm = report.confusion;
    std::ostringstream out;
    out << json{{"record", "summary"},
                {"model", report.model},
                {"protocol", report.protocol},
                {"seed", report.seed},
                {"folds", report.folds},
                {"profile", report.profile},
                {"samples", cm.total()},
                {"overall_rate", cm.overall_rate()}}
               .dump()
        << '\n';
    out << json{{"record", "confusion"}, {"classes", cm.classes}, {"counts", cm.counts}}.dump() << '\n';
    if (report.guess) {
        const auto& g = *report.guess;
        out << json{{"record", "guess_curve"},
                    {"classes", g.classes},
                    {"samples", g.samples},
                    {"average", g.average},
                    {"per_class", g.per_class}}
                   .dump()
            << '\n';
    }
    return out.str();
}

EvalReport parse_report_records(std::string_view text) {
    EvalReport r;
    std::istringstream in{std::string(text)};
    std::string line;
    bool summary = false, confusion = false;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            const auto kind = j.at("record").get<std::string>();
            if (kind == "summary") {
                r.model = j.at("model").get<std::string>();
                r.protocol = j.at("protocol").get<std::string>();
                r.seed = j.at("seed").get<std::uint64_t>();
                r.folds = j.at("folds").get<std::size_t>();
                r.profile = j.at("profile").get<std::string>();
                summary = true;
            } else if (kind == "confusion") {
                r.confusion = ConfusionMatrix(j.at("classes").get<std::vector<std::string>>());
                r.confusion.counts = j.at("counts").get<std::vector<std::vector<std::size_t>>>();
                confusion = true;
            } else if (kind == "guess_curve") {
                GuessCurve g;
                g.classes = j.at("classes").get<std::vector<std::string>>();
                g.samples = j.at("samples").get<std::size_t>();
                g.average = j.at("average").get<std::vector<double>>();
                g.per_class = j.at("per_class").get<std::vector<std::vector<double>>>();
                r.guess = std::move(g);
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    if (!summary || !confusion) throw Error(ErrorCode::MalformedRecord, "report lacks summary or confusion record");
    return r;
}

std::string render_text(const EvalReport& report) {
    const auto& cm = report.confusion;
    std::ostringstream out;
    out << "Model: " << report.model << "\nProtocol: " << report.protocol;
    if (report.folds > 0) out << " (" << report.folds << " folds)";
    out << "\nSeed: " << report.seed << "\nSamples: " << cm.total()
        << "\nOverall identification rate: " << format_percent(100.0 * cm.overall_rate()) << "\n\n";

    out << "Confusion matrix (columns: actual class)\n" << render_confusion_table(cm) << '\n';
    if (all_actions(cm.classes)) {
        out << "First stage (click / hold / scroll / zoom)\n" << render_confusion_table(stage1_view(cm)) << '\n';
        const auto scrolls = scroll_view(cm);
        if (!scrolls.classes.empty()) {
            out << "Scroll directions\n" << render_confusion_table(scrolls) << '\n';
        }
    }
    if (all_digits(cm.classes)) {
        const auto profile = DeviceProfile::by_name(report.profile.empty() ? "nexus5" : report.profile);
        out << "Identification rate per digit\n" << render_digit_grid(cm, profile) << '\n';
    }
    if (report.guess) {
        out << "Identification rate by number of guesses\n" << render_guess_table(*report.guess) << '\n';
    }
    return out.str();
}

}  // namespace touchsig
