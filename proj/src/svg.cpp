#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hypermatch/error.hpp"
#include "hypermatch/harness.hpp"

namespace hm::harness {

namespace {

constexpr double width = 640, height = 420;
constexpr double left = 80, right = 170, top = 40, bottom = 60;
const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0, hi = 1;  // in transformed units

    double tf(double v) const { return log ? std::log10(v) : v; }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }

    std::vector<double> ticks() const {  // raw values
        std::vector<double> t;
        if (log) {
            for (double e = std::ceil(lo - 1e-9); e <= hi + 1e-9; e += 1) t.push_back(std::pow(10.0, e));
            if (t.size() < 2) {
                t.clear();
                for (int i = 0; i <= 4; ++i) t.push_back(std::pow(10.0, lo + (hi - lo) * i / 4));
            }
            return t;
        }
        double span = hi - lo;
        double step = std::pow(10.0, std::floor(std::log10(span / 5)));
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (span / (step * m) <= 6) {
                step *= m;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
            t.push_back(std::fabs(v) < 1e-12 * span ? 0.0 : v);
        return t;
    }
};

Axis make_axis(bool log, const std::vector<const std::vector<double>*>& data) {
    Axis a;
    a.log = log;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto* v : data)
        for (double x : *v)
            if (a.usable(x)) {
                lo = std::min(lo, a.tf(x));
                hi = std::max(hi, a.tf(x));
            }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
        double pad = log ? 0.5 : std::max(1e-6, std::fabs(lo) * 0.1);
        lo -= pad;
        hi += pad;
    } else {
        double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
    std::vector<const std::vector<double>*> xs, ys;
    for (const auto& s : plot.series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
    }
    Axis ax = make_axis(plot.logx, xs), ay = make_axis(plot.logy, ys);
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (ax.tf(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return top + ph - (ay.tf(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + escape(plot.title) + "</text>\n";
    o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : ax.ticks()) {
        double x = px(t);
        if (x < left - 0.5 || x > left + pw + 0.5) continue;
        o += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
             num(top + ph + 5) + "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + label(t) +
             "</text>\n";
    }
    for (double t : ay.ticks()) {
        double y = py(t);
        if (y < top - 0.5 || y > top + ph + 0.5) continue;
        o += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" +
             num(y) + "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + label(t) +
             "</text>\n";
    }
    std::string xl = plot.xlabel + (plot.logx ? " (log)" : "");
    std::string yl = plot.ylabel + (plot.logy ? " (log)" : "");
    o += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(xl) + "</text>\n";
    o += "<text x=\"18\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 18 " + num(top + ph / 2) + ")\">" + escape(yl) +
         "</text>\n";

    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& s = plot.series[i];
        const char* color = palette[i % (sizeof palette / sizeof *palette)];
        std::string pts;
        std::size_t m = std::min(s.x.size(), s.y.size());
        for (std::size_t j = 0; j < m; ++j) {
            if (!ax.usable(s.x[j]) || !ay.usable(s.y[j])) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(px(s.x[j])) + "," + num(py(s.y[j]));
        }
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"";
        if (s.dashed) o += " stroke-dasharray=\"6,4\"";
        o += " points=\"" + pts + "\"/>\n";
        double ly = top + 14 + 18 * static_cast<double>(i);
        o += "<line x1=\"" + num(left + pw + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 34) +
             "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
             (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        o += "<text x=\"" + num(left + pw + 40) + "\" y=\"" + num(ly + 4) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

json plot_to_json(const PlotSpec& plot) {
    json j;
    j["name"] = plot.name;
    j["title"] = plot.title;
    j["xlabel"] = plot.xlabel;
    j["ylabel"] = plot.ylabel;
    j["logx"] = plot.logx;
    j["logy"] = plot.logy;
    j["series"] = json::array();
    for (const auto& s : plot.series) {
        json js;
        js["label"] = s.label;
        js["dashed"] = s.dashed;
        json x = json::array(), y = json::array();
        for (double v : s.x) x.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        for (double v : s.y) y.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        js["x"] = x;
        js["y"] = y;
        j["series"].push_back(js);
    }
    return j;
}

PlotSpec plot_from_json(const json& j) {
    PlotSpec p;
    p.name = j.at("name").get<std::string>();
    p.title = j.value("title", "");
    p.xlabel = j.value("xlabel", "");
    p.ylabel = j.value("ylabel", "");
    p.logx = j.value("logx", true);
    p.logy = j.value("logy", true);
    for (const auto& js : j.at("series")) {
        Series s;
        s.label = js.value("label", "");
        s.dashed = js.value("dashed", false);
        for (const auto& v : js.at("x")) s.x.push_back(v.is_null() ? NAN : v.get<double>());
        for (const auto& v : js.at("y")) s.y.push_back(v.is_null() ? NAN : v.get<double>());
        p.series.push_back(std::move(s));
    }
    return p;
}

std::vector<std::string> emit_plots(const json& record, const std::string& directory) {
    std::vector<std::string> written;
    if (!record.contains("plots")) return written;
    std::filesystem::create_directories(directory);
    for (const auto& pj : record.at("plots")) {
        PlotSpec p = plot_from_json(pj);
        std::string path = (std::filesystem::path(directory) / (p.name + ".svg")).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) fail(ErrorKind::io, "cannot write '" + path + "'");
        f << render_svg(p);
        written.push_back(path);
    }
    return written;
}

}  // namespace hm::harness
