#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thermolap/errors.hpp"

namespace thermolap::csv {

// Numeric CSV table with a single header row and optional `# key=value`
// metadata comment lines. Decimal separator is `.`, encoding UTF-8.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;

    std::size_t n_rows() const { return rows.size(); }

    int column_index(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(std::string_view name, const std::string& context) const {
        int i = column_index(name);
        if (i < 0)
            fail(errc::missing_column, "column '" + std::string(name) + "' missing in " + context);
        return i;
    }

    std::vector<double> column(std::string_view name, const std::string& context) const {
        int i = require_column(name, context);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(i)]);
        return out;
    }

    double meta_number(const std::string& key, const std::string& context) const {
        auto it = metadata.find(key);
        if (it == metadata.end())
            fail(errc::missing_column, "metadata '# " + key + "=' missing in " + context);
        return std::stod(it->second);
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view tok, std::size_t line_no, std::string_view col,
                           const std::string& context) {
    tok = trim(tok);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        fail(errc::non_finite_value, "cannot parse '" + std::string(tok) + "' (line " +
                                         std::to_string(line_no) + ", column '" + std::string(col) +
                                         "') in " + context);
    return v;
}

inline void split(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
}

}  // namespace detail

inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();
    const std::string context = path.filename().string();

    Table table;
    std::vector<std::string_view> toks;
    std::size_t pos = 0, line_no = 0;
    bool have_header = false;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string_view body = detail::trim(line.substr(1));
            std::size_t eq = body.find('=');
            if (eq != std::string_view::npos)
                table.metadata.emplace(std::string(detail::trim(body.substr(0, eq))),
                                       std::string(detail::trim(body.substr(eq + 1))));
            continue;
        }
        detail::split(line, toks);
        if (!have_header) {
            for (auto t : toks) table.columns.emplace_back(detail::trim(t));
            have_header = true;
            continue;
        }
        if (toks.size() != table.columns.size())
            fail(errc::non_finite_value, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(toks.size()) + " fields, expected " +
                                             std::to_string(table.columns.size()) + " in " + context);
        std::vector<double> row(toks.size());
        for (std::size_t i = 0; i < toks.size(); ++i)
            row[i] = detail::parse_number(toks[i], line_no, table.columns[i], context);
        table.rows.push_back(std::move(row));
    }
    if (!have_header) fail(errc::missing_column, "no header row in " + context);
    return table;
}

// Formats a double with round-trip precision; output is locale independent.
inline void append_number(std::string& out, double v) {
    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path) {}

    void meta(const std::string& key, const std::string& value) {
        body_ += "# " + key + "=" + value + "\n";
    }
    void meta(const std::string& key, double value) {
        body_ += "# " + key + "=";
        append_number(body_, value);
        body_ += "\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) body_ += ',';
            body_ += cols[i];
        }
        body_ += '\n';
    }

    void row(std::initializer_list<double> vals) { row(std::vector<double>(vals)); }

    template <class Seq>
    void row(const Seq& vals) {
        bool first = true;
        for (double v : vals) {
            if (!first) body_ += ',';
            append_number(body_, v);
            first = false;
        }
        body_ += '\n';
    }

    void raw_line(const std::string& line) { body_ += line + "\n"; }

    void write() {
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        if (!out) fail(errc::io_failure, "cannot write " + path_.string());
        out << body_;
    }

private:
    std::filesystem::path path_;
    std::string body_;
};

}  // namespace thermolap::csv
