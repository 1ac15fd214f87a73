#include "omix/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "omix/error.hpp"

namespace fs = std::filesystem;

namespace omix::data {

std::vector<std::string> OmicsDataset::block_names() const {
    std::vector<std::string> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back(b.name);
    return out;
}

namespace {

char sniff_delimiter(const std::string& header) {
    return header.find('\t') != std::string::npos ? '\t' : ',';
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& tok, const std::string& file, std::size_t line,
                    std::size_t col) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail("unparseable number '" + tok + "' in " + file + " line " +
             std::to_string(line) + " column " + std::to_string(col));
    }
}

struct RawTable {
    std::vector<std::string> feature_names;
    std::vector<std::string> sample_ids;
    std::vector<std::vector<double>> rows;
};

RawTable read_table(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '" + path + "'");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty file '" + path + "'");
    const char delim = sniff_delimiter(line);
    auto header = split_line(line, delim);
    require(header.size() >= 2, "header of '" + path + "' has no feature columns");

    RawTable t;
    t.feature_names.assign(header.begin() + 1, header.end());
    std::unordered_set<std::string> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_line(line, delim);
        require(cells.size() == header.size(),
                "row with " + std::to_string(cells.size()) + " cells (expected " +
                    std::to_string(header.size()) + ") in " + path + " line " +
                    std::to_string(lineno));
        if (!seen.insert(cells[0]).second)
            fail("duplicate sample id '" + cells[0] + "' in " + path + " line " +
                 std::to_string(lineno));
        t.sample_ids.push_back(cells[0]);
        std::vector<double> row(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c)
            row[c - 1] = parse_number(cells[c], path, lineno, c + 1);
        t.rows.push_back(std::move(row));
    }
    return t;
}

BlockKind parse_kind(const std::string& s) {
    if (s == "continuous") return BlockKind::continuous;
    if (s == "binary") return BlockKind::binary;
    fail("unknown block kind '" + s + "' (expected continuous or binary)");
}

const char* kind_name(BlockKind k) {
    return k == BlockKind::continuous ? "continuous" : "binary";
}

}  // namespace

OmicsDataset load_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "cannot open manifest '" + manifest_path + "'");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        fail("manifest '" + manifest_path + "' is not valid JSON: " + e.what());
    }
    require(manifest.contains("labels"), "manifest lacks 'labels' entry");
    require(manifest.contains("blocks") && manifest["blocks"].is_array() &&
                !manifest["blocks"].empty(),
            "manifest lacks a non-empty 'blocks' array");

    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    OmicsDataset ds;
    ds.name = manifest.value("name", fs::path(manifest_path).stem().string());

    // labels file: sample id + {0,1}
    const std::string labels_path = resolve(manifest["labels"].get<std::string>());
    RawTable lt = read_table(labels_path);
    require(lt.feature_names.size() == 1,
            "labels file '" + labels_path + "' must have exactly two columns");
    std::unordered_map<std::string, int> label_of;
    for (std::size_t i = 0; i < lt.sample_ids.size(); ++i) {
        const double v = lt.rows[i][0];
        if (v != 0.0 && v != 1.0)
            fail("label '" + std::to_string(v) + "' for sample '" + lt.sample_ids[i] +
                 "' in " + labels_path + " is not 0/1");
        label_of[lt.sample_ids[i]] = static_cast<int>(v);
    }

    struct Loaded {
        RawTable table;
        std::unordered_map<std::string, std::size_t> row_of;
    };
    std::vector<Loaded> loaded;
    for (const auto& jb : manifest["blocks"]) {
        OmicsBlock b;
        b.name = jb.at("name").get<std::string>();
        b.kind = parse_kind(jb.at("kind").get<std::string>());
        b.variance_threshold = jb.value("variance_threshold", 0.0);
        const std::string path = resolve(jb.at("path").get<std::string>());
        Loaded l;
        l.table = read_table(path);
        if (b.kind == BlockKind::binary) {
            for (std::size_t r = 0; r < l.table.rows.size(); ++r)
                for (std::size_t c = 0; c < l.table.rows[r].size(); ++c) {
                    const double v = l.table.rows[r][c];
                    if (v != 0.0 && v != 1.0)
                        fail("value " + std::to_string(v) + " in binary block '" +
                             b.name + "' (" + path + ") row " + std::to_string(r + 2) +
                             " column " + std::to_string(c + 2) + " is not 0/1");
                }
        }
        for (std::size_t r = 0; r < l.table.sample_ids.size(); ++r)
            l.row_of[l.table.sample_ids[r]] = r;
        b.feature_names = l.table.feature_names;
        ds.blocks.push_back(std::move(b));
        loaded.push_back(std::move(l));
    }

    // keep samples present in the labels file and every block, labels order
    std::vector<std::string> kept;
    for (const auto& id : lt.sample_ids) {
        bool everywhere = true;
        for (const auto& l : loaded)
            if (!l.row_of.count(id)) {
                everywhere = false;
                break;
            }
        if (everywhere)
            kept.push_back(id);
        else
            ++ds.dropped_samples;
    }
    require(!kept.empty(), "no sample id is shared by all blocks and the labels file");

    ds.sample_ids = kept;
    for (const auto& id : kept) ds.labels.push_back(label_of.at(id));
    for (std::size_t bi = 0; bi < ds.blocks.size(); ++bi) {
        auto& b = ds.blocks[bi];
        const auto& l = loaded[bi];
        b.values.resize(kept.size(), b.feature_names.size());
        for (std::size_t r = 0; r < kept.size(); ++r) {
            const auto& src = l.table.rows[l.row_of.at(kept[r])];
            std::copy(src.begin(), src.end(), b.values.row_ptr(r));
        }
    }
    return ds;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    else
        std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_dataset(const OmicsDataset& ds, const std::string& out_dir,
                   const std::string& manifest_name) {
    fs::create_directories(out_dir);
    const fs::path base(out_dir);

    {
        std::ofstream out(base / "labels.csv");
        require(out.good(), "cannot write labels to '" + out_dir + "'");
        out << "sample_id,response\n";
        for (std::size_t i = 0; i < ds.num_samples(); ++i)
            out << ds.sample_ids[i] << ',' << ds.labels[i] << '\n';
    }

    nlohmann::json manifest;
    manifest["name"] = ds.name;
    manifest["labels"] = "labels.csv";
    manifest["blocks"] = nlohmann::json::array();
    for (const auto& b : ds.blocks) {
        const std::string fname = b.name + ".csv";
        std::ofstream out(base / fname);
        require(out.good(), "cannot write block '" + b.name + "' to '" + out_dir + "'");
        out << "sample_id";
        for (const auto& f : b.feature_names) out << ',' << f;
        out << '\n';
        for (std::size_t r = 0; r < b.values.rows; ++r) {
            out << ds.sample_ids[r];
            for (std::size_t c = 0; c < b.values.cols; ++c)
                out << ',' << format_value(b.values.at(r, c));
            out << '\n';
        }
        manifest["blocks"].push_back({{"name", b.name},
                                      {"path", fname},
                                      {"kind", kind_name(b.kind)},
                                      {"variance_threshold", b.variance_threshold}});
    }
    std::ofstream mout(base / manifest_name);
    require(mout.good(), "cannot write manifest to '" + out_dir + "'");
    mout << manifest.dump(2) << '\n';
}

std::vector<std::uint8_t> variance_filter(const Matrix& block,
                                          std::span<const int> train_rows,
                                          double threshold) {
    require(threshold >= 0.0, "variance_filter: negative threshold");
    require(!train_rows.empty(), "variance_filter: no training rows");
    const double n = static_cast<double>(train_rows.size());
    std::vector<std::uint8_t> keep(block.cols, 0);
    std::size_t kept = 0;
    for (std::size_t c = 0; c < block.cols; ++c) {
        double mean = 0.0;
        for (int r : train_rows) mean += block.at(static_cast<std::size_t>(r), c);
        mean /= n;
        double var = 0.0;
        for (int r : train_rows) {
            const double d = block.at(static_cast<std::size_t>(r), c) - mean;
            var += d * d;
        }
        var /= n;  // population variance
        if (var > threshold) {
            keep[c] = 1;
            ++kept;
        }
    }
    require(kept > 0, "variance_filter: threshold " + std::to_string(threshold) +
                          " removes all features");
    return keep;
}

PreprocessState fit_preprocess(const OmicsDataset& ds, std::span<const int> train_rows,
                               ScalingKind continuous_scaling) {
    PreprocessState state;
    for (const auto& b : ds.blocks) {
        BlockPreprocess bp;
        bp.name = b.name;
        bp.kind = b.kind;
        bp.input_features = b.feature_names;
        bp.keep = variance_filter(b.values, train_rows, b.variance_threshold);
        bp.scaling =
            b.kind == BlockKind::continuous ? continuous_scaling : ScalingKind::none;

        for (std::size_t c = 0; c < b.values.cols; ++c) {
            if (!bp.keep[c]) continue;
            if (bp.scaling == ScalingKind::standardize) {
                double mean = 0.0;
                for (int r : train_rows) mean += b.values.at(static_cast<std::size_t>(r), c);
                mean /= static_cast<double>(train_rows.size());
                double var = 0.0;
                for (int r : train_rows) {
                    const double d = b.values.at(static_cast<std::size_t>(r), c) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(train_rows.size());
                bp.center.push_back(mean);
                bp.scale.push_back(std::sqrt(var));
            } else if (bp.scaling == ScalingKind::minmax) {
                double lo = b.values.at(static_cast<std::size_t>(train_rows[0]), c);
                double hi = lo;
                for (int r : train_rows) {
                    const double v = b.values.at(static_cast<std::size_t>(r), c);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                bp.center.push_back(lo);
                bp.scale.push_back(hi - lo);  // positive: kept features vary
            }
        }
        state.blocks.push_back(std::move(bp));
    }
    return state;
}

std::vector<Matrix> apply_preprocess(const PreprocessState& state,
                                     const OmicsDataset& ds,
                                     std::span<const int> rows) {
    require(state.blocks.size() == ds.blocks.size(),
            "apply_preprocess: dataset has " + std::to_string(ds.blocks.size()) +
                " blocks, state expects " + std::to_string(state.blocks.size()));
    std::vector<Matrix> out;
    for (std::size_t bi = 0; bi < state.blocks.size(); ++bi) {
        const BlockPreprocess& bp = state.blocks[bi];
        const OmicsBlock& b = ds.blocks[bi];
        require(bp.name == b.name, "apply_preprocess: block order mismatch, expected '" +
                                       bp.name + "' got '" + b.name + "'");

        // align incoming features by name against the fitted feature list
        std::unordered_map<std::string, std::size_t> incoming;
        for (std::size_t c = 0; c < b.feature_names.size(); ++c)
            incoming[b.feature_names[c]] = c;
        std::vector<std::string> missing, extra;
        std::vector<std::size_t> col_of(bp.input_features.size());
        for (std::size_t c = 0; c < bp.input_features.size(); ++c) {
            auto it = incoming.find(bp.input_features[c]);
            if (it == incoming.end())
                missing.push_back(bp.input_features[c]);
            else
                col_of[c] = it->second;
        }
        if (b.feature_names.size() != bp.input_features.size() || !missing.empty()) {
            std::unordered_set<std::string> expect(bp.input_features.begin(),
                                                   bp.input_features.end());
            for (const auto& f : b.feature_names)
                if (!expect.count(f)) extra.push_back(f);
        }
        if (!missing.empty() || !extra.empty()) {
            auto preview = [](const std::vector<std::string>& v) {
                std::string s;
                for (std::size_t i = 0; i < v.size() && i < 5; ++i)
                    s += (i ? "," : "") + v[i];
                if (v.size() > 5) s += ",...";
                return s;
            };
            fail("apply_preprocess: block '" + b.name + "' feature mismatch; missing " +
                 std::to_string(missing.size()) + " [" + preview(missing) + "], extra " +
                 std::to_string(extra.size()) + " [" + preview(extra) + "]");
        }

        std::size_t kept_count = 0;
        for (auto k : bp.keep) kept_count += k;
        Matrix m(rows.size(), kept_count);
        for (std::size_t ri = 0; ri < rows.size(); ++ri) {
            require(rows[ri] >= 0 &&
                        static_cast<std::size_t>(rows[ri]) < b.values.rows,
                    "apply_preprocess: row index out of range");
            const double* src = b.values.row_ptr(static_cast<std::size_t>(rows[ri]));
            double* dst = m.row_ptr(ri);
            std::size_t out_c = 0;
            for (std::size_t c = 0; c < bp.keep.size(); ++c) {
                if (!bp.keep[c]) continue;
                double v = src[col_of[c]];
                if (bp.scaling == ScalingKind::standardize) {
                    v = (v - bp.center[out_c]) / bp.scale[out_c];
                } else if (bp.scaling == ScalingKind::minmax) {
                    v = (v - bp.center[out_c]) / bp.scale[out_c];
                    v = std::clamp(v, 0.0, 1.0);  // held-out values may exceed range
                }
                dst[out_c++] = v;
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<int> stratified_kfold(std::span<const int> labels, int k, Rng& rng) {
    require(k >= 2, "stratified_kfold: k must be at least 2");
    std::vector<int> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] ? pos : neg).push_back(static_cast<int>(i));
    for (const auto* cls : {&pos, &neg})
        require(static_cast<int>(cls->size()) >= k,
                "stratified_kfold: class with " + std::to_string(cls->size()) +
                    " samples is smaller than k=" + std::to_string(k));

    std::vector<int> fold_of(labels.size(), -1);
    for (auto* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        for (std::size_t i = 0; i < cls->size(); ++i)
            fold_of[(*cls)[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold_of;
}

}  // namespace omix::data
