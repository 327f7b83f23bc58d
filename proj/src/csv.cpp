#include "casimir/csv.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "casimir/errors.hpp"

namespace casimir::csv {

namespace {

const std::array<const char*, 7> kSweepColumns = {"L",      "alpha_over_v", "delta_l", "mean_w",
                                                  "m2_w",   "mean_n",       "m2_n"};

std::string sweep_header() {
    return std::string("L,alpha_over_v,delta_l,mean_w[") + kEnergyUnit + "],m2_w[(" + kEnergyUnit +
           ")^2],mean_n,m2_n";
}

void write_meta(std::ostream& out, const Metadata& meta) {
    for (const auto& [key, value] : meta) out << "# " << key << ": " << value << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string strip_unit(const std::string& name) { return name.substr(0, name.find('[')); }

double parse_double(const std::string& s) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw DomainError("csv: bad number '" + s + "'");
    return value;
}

}  // namespace

std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 12);
    return std::string(buf.data(), ptr);
}

void write_sweep(std::ostream& out, const SweepTable& table, const Metadata& meta) {
    write_meta(out, meta);
    out << sweep_header() << '\n';
    for (const auto& r : table.rows) {
        out << r.cutoff << ',' << format_double(r.speed_ratio) << ',' << format_double(r.delta_l) << ','
            << format_double(r.mean_w) << ',' << format_double(r.m2_w) << ',' << format_double(r.mean_n) << ','
            << format_double(r.m2_n) << '\n';
    }
}

SweepTable read_sweep(std::istream& in) {
    std::string line;
    bool have_header = false;
    SweepTable table;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line);
        if (!have_header) {
            bool ok = cells.size() == kSweepColumns.size();
            for (std::size_t i = 0; ok && i < cells.size(); ++i) ok = strip_unit(cells[i]) == kSweepColumns[i];
            if (!ok) throw DomainError("csv: unexpected header '" + line + "', expected '" + sweep_header() + "'");
            have_header = true;
            continue;
        }
        if (cells.size() != kSweepColumns.size()) throw DomainError("csv: wrong column count in '" + line + "'");
        SweepRow row;
        row.cutoff = static_cast<int>(parse_double(cells[0]));
        row.speed_ratio = parse_double(cells[1]);
        row.delta_l = parse_double(cells[2]);
        row.mean_w = parse_double(cells[3]);
        row.m2_w = parse_double(cells[4]);
        row.mean_n = parse_double(cells[5]);
        row.m2_n = parse_double(cells[6]);
        table.rows.push_back(row);
    }
    if (!have_header) throw DomainError("csv: missing header row");
    return table;
}

void write_speed_sweep(std::ostream& out, const std::vector<SpeedRow>& rows, const Metadata& meta) {
    write_meta(out, meta);
    out << "alpha_over_v,beta0[" << kEnergyUnit << "],beta1[" << kEnergyUnit << "],beta2[" << kEnergyUnit
        << "],gamma0,gamma1,gamma_l,residual_w,residual_n,condition_w,condition_n,status\n";
    for (const auto& r : rows) {
        out << format_double(r.speed_ratio);
        if (r.ok) {
            for (const double c : r.work_fit.coefficients) out << ',' << format_double(c);
            for (const double c : r.number_fit.coefficients) out << ',' << format_double(c);
            out << ',' << format_double(r.work_fit.residual_norm) << ',' << format_double(r.number_fit.residual_norm)
                << ',' << format_double(r.work_fit.condition) << ',' << format_double(r.number_fit.condition)
                << ",ok\n";
        } else {
            out << ",,,,,,,,,,,failed\n";
        }
    }
}

}  // namespace casimir::csv
