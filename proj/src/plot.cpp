#include "vltrack/plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vltrack {

namespace {

const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Curve>& curves) {
    if (curves.empty()) throw Error("write_curve_svg: no curves");
    double x_min = curves[0].x.front(), x_max = curves[0].x.back();
    for (const auto& c : curves) {
        if (c.x.size() != c.y.size() || c.x.empty())
            throw Error(cat("write_curve_svg: bad curve '", c.label, "'"));
        x_min = std::min(x_min, *std::min_element(c.x.begin(), c.x.end()));
        x_max = std::max(x_max, *std::max_element(c.x.begin(), c.x.end()));
    }
    if (x_max <= x_min) x_max = x_min + 1.0;

    const int w = 560, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    const int pw = w - ml - mr, ph = h - mt - mb;
    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) { return mt + (1.0 - y) * ph; };

    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";
    s << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
    // axes and grid
    for (int i = 0; i <= 5; ++i) {
        double fy = i / 5.0;
        s << "<line x1='" << ml << "' y1='" << py(fy) << "' x2='" << ml + pw << "' y2='" << py(fy)
          << "' stroke='#dddddd'/>\n";
        s << "<text x='" << ml - 8 << "' y='" << py(fy) + 4
          << "' text-anchor='end' font-size='11'>" << fy << "</text>\n";
        double fx = x_min + fy * (x_max - x_min);
        s << "<text x='" << px(fx) << "' y='" << mt + ph + 18
          << "' text-anchor='middle' font-size='11'>" << fx << "</text>\n";
    }
    s << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='black'/>\n";
    s << "<text x='" << ml + pw / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    s << "<text x='16' y='" << mt + ph / 2
      << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 " << mt + ph / 2 << ")'>"
      << y_label << "</text>\n";

    for (size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = kColors[ci % (sizeof(kColors) / sizeof(kColors[0]))];
        s << "<polyline fill='none' stroke='" << color << "' stroke-width='1.8' points='";
        for (size_t i = 0; i < c.x.size(); ++i)
            s << px(c.x[i]) << "," << py(std::clamp(c.y[i], 0.0, 1.0)) << " ";
        s << "'/>\n";
        s << "<text x='" << ml + pw - 8 << "' y='" << mt + 16 + 14 * double(ci)
          << "' text-anchor='end' font-size='11' fill='" << color << "'>" << c.label
          << "</text>\n";
    }
    s << "</svg>\n";

    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f << s.str();
    if (!f) throw Error(cat("failed writing ", path));
}

Curve success_curve(const std::string& label, const std::vector<double>& ious) {
    Curve c;
    c.label = label;
    for (int k = 0; k <= 20; ++k) {
        double t = k * 0.05;
        size_t cnt = 0;
        for (double v : ious)
            if (v > t) ++cnt;
        c.x.push_back(t);
        c.y.push_back(ious.empty() ? 0.0 : double(cnt) / double(ious.size()));
    }
    return c;
}

Curve precision_curve(const std::string& label, const std::vector<double>& center_errors,
                      int max_px) {
    Curve c;
    c.label = label;
    for (int t = 0; t <= max_px; ++t) {
        size_t cnt = 0;
        for (double e : center_errors)
            if (e <= t) ++cnt;
        c.x.push_back(t);
        c.y.push_back(center_errors.empty() ? 0.0 : double(cnt) / double(center_errors.size()));
    }
    return c;
}

void write_curve_csv(const std::string& path, const std::vector<Curve>& curves) {
    if (curves.empty()) throw Error("write_curve_csv: no curves");
    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f << "label,x,y\n";
    f.precision(9);
    for (const auto& c : curves)
        for (size_t i = 0; i < c.x.size(); ++i)
            f << c.label << "," << c.x[i] << "," << c.y[i] << "\n";
    if (!f) throw Error(cat("failed writing ", path));
}

std::vector<Curve> read_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(cat("cannot open ", path));
    std::vector<Curve> curves;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("label,", 0) == 0)) continue;
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw Error(cat(path, ":", lineno, ": malformed curve row"));
        std::string label = line.substr(0, c1);
        double x, y;
        try {
            x = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            y = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw Error(cat(path, ":", lineno, ": malformed number"));
        }
        if (curves.empty() || curves.back().label != label) curves.push_back(Curve{label, {}, {}});
        curves.back().x.push_back(x);
        curves.back().y.push_back(y);
    }
    if (curves.empty()) throw Error(cat(path, ": no curves"));
    return curves;
}

}  // namespace vltrack
