#include "limbmap/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "text_util.hpp"

namespace limbmap {

namespace {

void escape_into(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// 1, 2 or 5 times a power of ten giving roughly `target` ticks over span.
double tick_step(double span, int target = 6) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
    }
};

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, double width, double panel_height) {
    const double left = 70.0, right = 170.0, top = 34.0, bottom = 46.0;
    const double height = panel_height * static_cast<double>(panels.size());
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) +
                      "\" height=\"" + fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + ' ' +
                      fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Panel& panel = panels[p];
        const double y0 = panel_height * static_cast<double>(p);
        const double pw = width - left - right, ph = panel_height - top - bottom;
        Range rx, ry;
        for (const Series& s : panel.series) {
            for (double v : s.x) rx.add(v);
            for (double v : s.y) ry.add(v);
        }
        rx.settle();
        ry.settle();
        const double pad = 0.05 * (ry.hi - ry.lo);
        ry.lo -= pad;
        ry.hi += pad;
        auto X = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
        auto Y = [&](double v) { return y0 + top + (ry.hi - v) / (ry.hi - ry.lo) * ph; };

        out += "<text x=\"" + fixed(left) + "\" y=\"" + fixed(y0 + 20) + "\" font-size=\"14\">";
        escape_into(out, panel.title);
        out += "</text>\n";
        out += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(y0 + top) + "\" width=\"" + fixed(pw) +
               "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";

        const double sx = tick_step(rx.hi - rx.lo), sy = tick_step(ry.hi - ry.lo);
        for (double t = std::ceil(rx.lo / sx) * sx; t <= rx.hi + 1e-9; t += sx) {
            out += "<line x1=\"" + fixed(X(t)) + "\" y1=\"" + fixed(y0 + top + ph) + "\" x2=\"" +
                   fixed(X(t)) + "\" y2=\"" + fixed(y0 + top + ph + 5) + "\" stroke=\"#444\"/>";
            out += "<text x=\"" + fixed(X(t)) + "\" y=\"" + fixed(y0 + top + ph + 18) +
                   "\" text-anchor=\"middle\">" + detail::format_double(std::round(t / sx) * sx) +
                   "</text>\n";
        }
        for (double t = std::ceil(ry.lo / sy) * sy; t <= ry.hi + 1e-9; t += sy) {
            out += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(Y(t)) + "\" x2=\"" +
                   fixed(left + pw) + "\" y2=\"" + fixed(Y(t)) + "\" stroke=\"#ddd\"/>";
            out += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(Y(t) + 4) +
                   "\" text-anchor=\"end\">" + detail::format_double(std::round(t / sy) * sy) +
                   "</text>\n";
        }
        out += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(y0 + panel_height - 6) +
               "\" text-anchor=\"middle\">";
        escape_into(out, panel.x_label);
        out += "</text>\n<text transform=\"translate(16 " + fixed(y0 + top + ph / 2) +
               ") rotate(-90)\" text-anchor=\"middle\">";
        escape_into(out, panel.y_label);
        out += "</text>\n";

        for (std::size_t k = 0; k < panel.series.size(); ++k) {
            const Series& s = panel.series[k];
            out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.4\"";
            if (s.dashed) out += " stroke-dasharray=\"5 3\"";
            out += " points=\"";
            const std::size_t n = std::min(s.x.size(), s.y.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    out += "\"/>\n<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.4\"";
                    if (s.dashed) out += " stroke-dasharray=\"5 3\"";
                    out += " points=\"";
                    continue;
                }
                out += fixed(X(s.x[i])) + ',' + fixed(Y(s.y[i])) + ' ';
            }
            out += "\"/>\n";
            const double ly = y0 + top + 14.0 + 18.0 * static_cast<double>(k);
            out += "<line x1=\"" + fixed(left + pw + 12) + "\" y1=\"" + fixed(ly) + "\" x2=\"" +
                   fixed(left + pw + 36) + "\" y2=\"" + fixed(ly) + "\" stroke=\"" + s.color +
                   "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"5 3\"" : "") + "/>";
            out += "<text x=\"" + fixed(left + pw + 42) + "\" y=\"" + fixed(ly + 4) + "\">";
            escape_into(out, s.label);
            out += "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

namespace {

Series recorded(const GaitRecording& rec, Joint j, std::string label, std::string color) {
    Series s{std::move(label), std::move(color), {}, {}, false};
    const auto& v = rec.samples(j);
    s.x.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s.x.push_back(static_cast<double>(i) / rec.sample_rate());
    s.y.assign(v.begin(), v.end());
    return s;
}

// Emitted samples drawn over the cycle that produced them.
Series shifted_back(const RunDirectory& run, bool hip, std::string label, std::string color) {
    Series s{std::move(label), std::move(color), {}, {}, true};
    const double fs = run.output.sample_rate;
    const auto& cycles = run.output.cycles;
    for (const CycleEmission* e : run.output.timeline()) {
        if (e->input_cycle >= cycles.size()) continue;
        const std::size_t start = cycles[e->input_cycle].start_sample;
        const auto& v = hip ? e->hip : e->knee;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s.x.push_back(static_cast<double>(start + i) / fs);
            s.y.push_back(v[i]);
        }
        s.x.push_back(std::numeric_limits<double>::quiet_NaN());
        s.y.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return s;
}

Series emitted(const RunDirectory& run, std::string label, std::string color) {
    Series s{std::move(label), std::move(color), {}, {}, false};
    for (const CycleEmission* e : run.output.timeline()) {
        s.x.insert(s.x.end(), e->times.begin(), e->times.end());
        s.y.insert(s.y.end(), e->hip.begin(), e->hip.end());
    }
    return s;
}

}  // namespace

std::string restoration_figure(const RunDirectory& run) {
    std::vector<Panel> panels;
    panels.push_back({"Hip: restored output moved back one cycle", "time (s)", "angle (deg)",
                      {recorded(run.recording, Joint::Hip, "recorded", "#1f77b4"),
                       shifted_back(run, true, "restored", "#d62728")}});
    panels.push_back({"Knee: restored output moved back one cycle", "time (s)", "angle (deg)",
                      {recorded(run.recording, Joint::Knee, "recorded", "#1f77b4"),
                       shifted_back(run, false, "restored", "#d62728")}});
    return render_svg(panels);
}

std::string coordination_figure(const RunDirectory& run) {
    std::vector<Panel> panels;
    panels.push_back({"Recorded shoulder and recorded hip", "time (s)", "angle (deg)",
                      {recorded(run.recording, Joint::Shoulder, "shoulder", "#2ca02c"),
                       recorded(run.recording, Joint::Hip, "hip", "#1f77b4")}});
    panels.push_back({"Recorded shoulder and emitted hip", "time (s)", "angle (deg)",
                      {recorded(run.recording, Joint::Shoulder, "shoulder", "#2ca02c"),
                       emitted(run, "emitted hip", "#d62728")}});
    return render_svg(panels);
}

}  // namespace limbmap
