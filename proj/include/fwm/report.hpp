#ifndef FWM_REPORT_HPP
#define FWM_REPORT_HPP

// CSV (RFC 4180, header row, shortest round-trip numbers) and static SVG line plots.

#include <string>
#include <variant>
#include <vector>

namespace fwm
{
// NaN doubles are written as empty fields.
using CsvCell = std::variant<double, long, bool, std::string>;

class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<CsvCell> row);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string &path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<CsvCell>> rows_;
};

std::string csv_escape(const std::string &field);

struct PlotSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec
{
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
};

// Non-finite points (and non-positive ones on a log axis) are skipped.
std::string svg_line_plot(const PlotSpec &spec, const std::vector<PlotSeries> &series);
void write_text_file(const std::string &path, const std::string &text);

}  // namespace fwm

#endif  // FWM_REPORT_HPP
