#include "ratedml/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ratedml::svg {

namespace {

constexpr double kMargin = 60.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string open(double w, double h, const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " +
           num(w) + " " + num(h) + "\">\n<title>" + escape(title) + "</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string corr_color(double r) {
    const double t = std::clamp(std::isnan(r) ? 0.0 : r, -1.0, 1.0);
    // white at 0, (178,24,43) at +1, (33,102,172) at -1
    const double a = std::abs(t);
    const int tr = t >= 0 ? 178 : 33, tg = t >= 0 ? 24 : 102, tb = t >= 0 ? 43 : 172;
    auto mix = [a](int target) { return static_cast<int>(std::lround(255.0 + a * (target - 255.0))); };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(tr), mix(tg), mix(tb));
    return buf;
}

std::string corr_heatmap(const std::vector<std::string>& names, const Matrix& corr) {
    const auto k = static_cast<double>(names.size());
    const double cell = 40.0;
    const double left = 120.0, top = 120.0;
    std::string out = open(left + k * cell + 100.0, top + k * cell + 20.0, "Correlation matrix");
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = top + static_cast<double>(i) * cell;
        out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + cell / 2 + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
               escape(names[i]) + "</text>\n";
        const double x = left + static_cast<double>(i) * cell + cell / 2;
        out += "<text x=\"" + num(x) + "\" y=\"" + num(top - 6) + "\" transform=\"rotate(-60 " + num(x) + " " + num(top - 6) +
               ")\" font-size=\"11\">" + escape(names[i]) + "</text>\n";
    }
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        for (Eigen::Index j = 0; j < corr.cols(); ++j) {
            out += "<rect class=\"cell\" data-value=\"" + num(corr(i, j)) + "\" x=\"" + num(left + static_cast<double>(j) * cell) +
                   "\" y=\"" + num(top + static_cast<double>(i) * cell) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
                   "\" fill=\"" + corr_color(corr(i, j)) + "\"/>\n";
        }
    }
    // legend
    const double lx = left + k * cell + 30.0;
    for (int s = 0; s <= 20; ++s) {
        const double r = 1.0 - s / 10.0;
        out += "<rect class=\"legend\" x=\"" + num(lx) + "\" y=\"" + num(top + s * 8.0) + "\" width=\"16\" height=\"8\" fill=\"" +
               corr_color(r) + "\"/>\n";
    }
    out += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(top + 8) + "\" font-size=\"10\">1</text>\n";
    out += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(top + 168) + "\" font-size=\"10\">-1</text>\n";
    out += "</svg>\n";
    return out;
}

std::string pca_scree(const Vector& explained_ratio) {
    const auto k = static_cast<double>(explained_ratio.size());
    const double bar = 30.0;
    const double width = kMargin * 2 + std::max(1.0, k) * bar * 1.5;
    const double base = kMargin + kPlotHeight;
    std::string out = open(width, base + kMargin, "Explained variance by principal component");
    out += "<line class=\"axis\" x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) + "\" y2=\"" +
           num(base) + "\" stroke=\"black\"/>\n";
    out += "<line class=\"axis\" x1=\"" + num(kMargin) + "\" y1=\"" + num(base) + "\" x2=\"" + num(width - kMargin) + "\" y2=\"" +
           num(base) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(kMargin + 4) + "\" text-anchor=\"end\" font-size=\"10\">1.0</text>\n";
    out += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(base + 4) + "\" text-anchor=\"end\" font-size=\"10\">0.0</text>\n";
    for (Eigen::Index j = 0; j < explained_ratio.size(); ++j) {
        const double h = std::max(0.0, explained_ratio(j)) * kPlotHeight;
        const double x = kMargin + bar * 0.25 + static_cast<double>(j) * bar * 1.5;
        out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(base - h) + "\" width=\"" + num(bar) + "\" height=\"" + num(h) +
               "\" fill=\"#4575b4\"/>\n";
        out += "<text x=\"" + num(x + bar / 2) + "\" y=\"" + num(base + 14) + "\" text-anchor=\"middle\" font-size=\"10\">PC" +
               std::to_string(j + 1) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string residuals_fitted(const std::vector<std::pair<double, double>>& points) {
    double fmin = 0.0, fmax = 1.0, rmax = 1.0;
    if (!points.empty()) {
        fmin = fmax = points.front().first;
        rmax = 0.0;
        for (const auto& [f, r] : points) {
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
            rmax = std::max(rmax, std::abs(r));
        }
        if (fmax == fmin) {
            fmin -= 0.5;
            fmax += 0.5;
        }
        if (rmax == 0.0) rmax = 1.0;
    }
    const double width = 500.0;
    const double plot_w = width - 2 * kMargin;
    const double mid = kMargin + kPlotHeight / 2;
    std::string out = open(width, kPlotHeight + 2 * kMargin, "Residuals vs fitted values");
    out += "<line class=\"zero\" x1=\"" + num(kMargin) + "\" y1=\"" + num(mid) + "\" x2=\"" + num(kMargin + plot_w) + "\" y2=\"" +
           num(mid) + "\" stroke=\"#d73027\"/>\n";
    for (const auto& [f, r] : points) {
        const double x = kMargin + (f - fmin) / (fmax - fmin) * plot_w;
        const double y = mid - r / rmax * (kPlotHeight / 2);
        out += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"1.5\" fill=\"#4575b4\" fill-opacity=\"0.5\"/>\n";
    }
    out += "<text x=\"" + num(width / 2) + "\" y=\"" + num(kPlotHeight + 2 * kMargin - 15) +
           "\" text-anchor=\"middle\" font-size=\"11\">fitted</text>\n";
    out += "<text x=\"15\" y=\"" + num(mid) + "\" font-size=\"11\" transform=\"rotate(-90 15 " + num(mid) + ")\">residual</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace ratedml::svg
