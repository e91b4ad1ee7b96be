#include "fwm/report.hpp"

#include "fwm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fwm
{
CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<CsvCell> row)
{
    if (row.size() != header_.size())
        throw std::logic_error("csv row width does not match header");
    rows_.push_back(std::move(row));
}

std::string csv_escape(const std::string &field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

namespace
{
std::string cell_text(const CsvCell &c)
{
    if (const auto *d = std::get_if<double>(&c))
        return std::isnan(*d) ? std::string() : format_number(*d);
    if (const auto *l = std::get_if<long>(&c))
        return std::to_string(*l);
    if (const auto *b = std::get_if<bool>(&c))
        return *b ? "1" : "0";
    return csv_escape(std::get<std::string>(c));
}
}  // namespace

std::string CsvTable::str() const
{
    std::string out;
    for (std::size_t k = 0; k < header_.size(); ++k)
        out += (k ? "," : "") + csv_escape(header_[k]);
    out += "\r\n";
    for (const auto &row : rows_)
    {
        for (std::size_t k = 0; k < row.size(); ++k)
            out += (k ? "," : "") + cell_text(row[k]);
        out += "\r\n";
    }
    return out;
}

void CsvTable::write(const std::string &path) const { write_text_file(path, str()); }

void write_text_file(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

namespace
{
std::string xml_escape(const std::string &s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(double v)
{
    std::ostringstream oss;
    oss.precision(6);
    oss << v;
    return oss.str();
}
}  // namespace

std::string svg_line_plot(const PlotSpec &spec, const std::vector<PlotSeries> &series)
{
    constexpr double W = 720, H = 480, L = 90, R = 160, T = 40, B = 60;
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    auto keep = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
    };
    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto &s : series)
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
            if (keep(s.x[k], s.y[k]))
            {
                xmin = std::min(xmin, s.x[k]);
                xmax = std::max(xmax, s.x[k]);
                ymin = std::min(ymin, ty(s.y[k]));
                ymax = std::max(ymax, ty(s.y[k]));
            }
    if (!std::isfinite(xmin))
    {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin)
        xmax = xmin + 1;
    if (ymax == ymin)
        ymax = ymin + 1;

    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (ty(y) - ymin) / (ymax - ymin) * (H - T - B); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(spec.title)
        << "</text>\n"
        << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << xml_escape(spec.x_label) << "</text>\n"
        << "<text x=\"18\" y=\"" << T + (H - T - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << T + (H - T - B) / 2 << ")\">" << xml_escape(spec.y_label) << (spec.log_y ? " (log10)" : "") << "</text>\n";

    for (int k = 0; k <= 4; ++k)
    {
        const double fx = xmin + (xmax - xmin) * k / 4.0;
        const double fy = ymin + (ymax - ymin) * k / 4.0;
        const double gx = L + (W - L - R) * k / 4.0;
        const double gy = H - B - (H - T - B) * k / 4.0;
        svg << "<text x=\"" << gx << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx)
            << "</text>\n"
            << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy)
            << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s)
    {
        const char *color = colors[s % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t k = 0; k < std::min(series[s].x.size(), series[s].y.size()); ++k)
        {
            if (!keep(series[s].x[k], series[s].y[k]))
                continue;
            svg << (first ? "" : " ") << fmt(px(series[s].x[k])) << "," << fmt(py(series[s].y[k]));
            first = false;
        }
        svg << "\"/>\n";
        const double ly = T + 16 + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << xml_escape(series[s].label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace fwm
