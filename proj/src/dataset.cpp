#include "regime/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace regime {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(t.header.size()) +
                                     " columns, got " + std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* s = cells[c].c_str();
            char* end = nullptr;
            row[c] = std::strtod(s, &end);
            if (end == s || *end != '\0' || !std::isfinite(row[c]))
                throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": column '" +
                                         t.header[c] + "': non-finite or non-numeric value '" +
                                         cells[c] + "'");
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw std::invalid_argument(path + ": no data rows");
    return t;
}

Matrix to_matrix(const Table& t, const std::vector<std::size_t>& cols) {
    Matrix m(t.rows.size(), cols.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = t.rows[i][cols[j]];
    return m;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void Dataset::validate() const {
    losses.validate();
    if (features.n() != losses.n())
        throw std::invalid_argument("dataset: feature rows (" + std::to_string(features.n()) +
                                 ") != loss rows (" + std::to_string(losses.n()) + ")");
    if (!direct_correct.empty() && direct_correct.size() != losses.n())
        throw std::invalid_argument("dataset: direct_correct length mismatch");
    if (!prior.empty() && prior.size() != losses.n())
        throw std::invalid_argument("dataset: prior length mismatch");
}

FeatureMatrix load_features_csv(const std::string& path) {
    Table t = read_table(path);
    std::vector<std::size_t> cols(t.header.size());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    return FeatureMatrix{to_matrix(t, cols), t.header};
}

std::pair<LossMatrix, std::vector<int>> load_losses_csv(const std::string& path) {
    Table t = read_table(path);
    std::vector<std::string> actions;
    std::vector<std::size_t> loss_cols;
    std::optional<std::size_t> correct_col;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (t.header[j].rfind("loss_", 0) == 0) {
            actions.push_back(t.header[j].substr(5));
            loss_cols.push_back(j);
        } else if (t.header[j] == "direct_correct") {
            correct_col = j;
        } else {
            throw std::invalid_argument(path + ": unexpected column '" + t.header[j] + "'");
        }
    }
    if (actions.size() < 2)
        throw std::invalid_argument(path + ": need at least two loss_<action> columns");

    LossMatrix L;
    L.actions = ActionSet{actions};
    L.values = to_matrix(t, loss_cols);
    L.l_max = 0.0;
    for (double v : L.values.data) {
        if (v < 0.0) throw std::invalid_argument(path + ": negative loss value");
        L.l_max = std::max(L.l_max, v);
    }
    std::vector<int> correct;
    if (correct_col) {
        correct.resize(t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            double v = t.rows[i][*correct_col];
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument(path + ": direct_correct must be binary at row " +
                                         std::to_string(i + 2));
            correct[i] = static_cast<int>(v);
        }
    }
    L.validate();
    return {std::move(L), std::move(correct)};
}

std::pair<LossComponents, ActionSet> load_components_csv(const std::string& path) {
    Table t = read_table(path);
    // action order follows the first appearance of each c_<action> column
    std::vector<std::string> actions;
    for (const auto& h : t.header)
        if (h.rfind("c_", 0) == 0) actions.push_back(h.substr(2));
    if (actions.size() < 2)
        throw std::invalid_argument(path + ": need at least two c_<action> columns");

    auto col_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t j = 0; j < t.header.size(); ++j)
            if (t.header[j] == name) return j;
        throw std::invalid_argument(path + ": missing column '" + name + "'");
    };

    std::vector<std::size_t> c_cols, h_cols, k_cols;
    for (const auto& a : actions) {
        c_cols.push_back(col_of("c_" + a));
        h_cols.push_back(col_of("h_" + a));
        k_cols.push_back(col_of("k_" + a));
    }
    LossComponents comp{to_matrix(t, c_cols), to_matrix(t, h_cols), to_matrix(t, k_cols)};
    comp.validate();
    return {std::move(comp), ActionSet{actions}};
}

std::vector<double> load_prior_csv(const std::string& path) {
    Table t = read_table(path);
    if (t.header.size() != 1)
        throw std::invalid_argument(path + ": prior file must have exactly one column");
    std::vector<double> z(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) z[i] = t.rows[i][0];
    return z;
}

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset ds;
    ds.name = paths.name;
    if (paths.features.empty()) throw std::invalid_argument("load_dataset: --features required");
    ds.features = load_features_csv(paths.features);

    if (!paths.components.empty()) {
        auto [comp, actions] = load_components_csv(paths.components);
        ds.losses = assemble_loss(comp, paths.weights, actions);
        auto direct = actions.find("direct");
        if (direct) {
            ds.direct_correct.resize(comp.c.rows);
            for (std::size_t i = 0; i < comp.c.rows; ++i)
                ds.direct_correct[i] = static_cast<int>(comp.c(i, *direct));
        }
    } else if (!paths.losses.empty()) {
        auto [L, correct] = load_losses_csv(paths.losses);
        ds.losses = std::move(L);
        ds.direct_correct = std::move(correct);
    } else {
        throw std::invalid_argument("load_dataset: need --losses or --components");
    }
    if (!paths.prior.empty()) ds.prior = load_prior_csv(paths.prior);
    ds.validate();
    return ds;
}

void save_features_csv(const std::string& path, const FeatureMatrix& fm) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t j = 0; j < fm.dim(); ++j) {
        if (j) out << ",";
        out << (j < fm.column_names.size() ? fm.column_names[j] : "f" + std::to_string(j));
    }
    out << "\n";
    for (std::size_t i = 0; i < fm.n(); ++i) {
        for (std::size_t j = 0; j < fm.dim(); ++j) {
            if (j) out << ",";
            out << format_double(fm.values(i, j));
        }
        out << "\n";
    }
}

void save_losses_csv(const std::string& path, const LossMatrix& L,
                     const std::vector<int>& direct_correct) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t a = 0; a < L.num_actions(); ++a) {
        if (a) out << ",";
        out << "loss_" << L.actions.labels[a];
    }
    if (!direct_correct.empty()) out << ",direct_correct";
    out << "\n";
    for (std::size_t i = 0; i < L.n(); ++i) {
        for (std::size_t a = 0; a < L.num_actions(); ++a) {
            if (a) out << ",";
            out << format_double(L.values(i, a));
        }
        if (!direct_correct.empty()) out << "," << direct_correct[i];
        out << "\n";
    }
}

void save_prior_csv(const std::string& path, const std::vector<double>& z) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "z\n";
    for (double v : z) out << format_double(v) << "\n";
}

}  // namespace regime
