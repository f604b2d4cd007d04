#include "sia/containers.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace sia {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& token) {
    if (token.empty()) throw InconsistentHeaderError("empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE)
        throw InconsistentHeaderError("bad numeric field '" + token + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw IoError("write failed on '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot move '" + tmp + "' onto '" + path + "'");
    }
}

namespace {

void put_f32(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

double get_f32(const char* p) {
    const auto b = [&](int i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i]));
    };
    const std::uint32_t bits = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

std::vector<std::string> split_ws(const std::string& line, std::size_t max_fields = 0) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        if (i >= line.size()) break;
        if (max_fields > 0 && out.size() + 1 == max_fields) {
            out.push_back(line.substr(i));
            return out;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::size_t parse_count(const std::string& token) {
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
        throw InconsistentHeaderError("bad count field '" + token + "'");
    errno = 0;
    const unsigned long long v = std::strtoull(token.c_str(), nullptr, 10);
    if (errno == ERANGE) throw InconsistentHeaderError("count field overflows");
    return static_cast<std::size_t>(v);
}

std::int64_t parse_i64(const std::string& token) {
    std::size_t digits = token.size() > 0 && token[0] == '-' ? 1 : 0;
    if (token.size() == digits ||
        token.find_first_not_of("0123456789", digits) != std::string::npos)
        throw InconsistentHeaderError("bad integer field '" + token + "'");
    errno = 0;
    const long long v = std::strtoll(token.c_str(), nullptr, 10);
    if (errno == ERANGE) throw InconsistentHeaderError("integer field overflows");
    return v;
}

/// Sequential reader over an in-memory container image.
class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::string line() {
        const std::size_t nl = bytes_.find('\n', pos_);
        if (nl == std::string::npos)
            throw TruncatedFileError("container ends mid-header");
        std::string out = bytes_.substr(pos_, nl - pos_);
        pos_ = nl + 1;
        return out;
    }

    /// Reads the `blob <count>` line and returns a pointer to `count` floats.
    const char* blob(std::size_t expected_floats) {
        const auto fields = split_ws(line());
        if (fields.size() != 2 || fields[0] != "blob")
            throw InconsistentHeaderError("expected the blob line");
        const std::size_t declared = parse_count(fields[1]);
        if (declared != expected_floats)
            throw InconsistentHeaderError("blob float count does not match the header");
        const std::size_t need = declared * 4;
        if (bytes_.size() - pos_ < need)
            throw TruncatedFileError("blob is shorter than declared");
        if (bytes_.size() - pos_ > need)
            throw InconsistentHeaderError("trailing bytes after the blob");
        return bytes_.data() + pos_;
    }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

void check_magic(Reader& r, const std::string& magic, const std::string& what) {
    const auto fields = split_ws(r.line());
    if (fields.size() != 2 || fields[0] != magic)
        throw ValidationError("not a " + what + " container");
    if (fields[1] != "1")
        throw FormatVersionError(what + " container has unsupported version " + fields[1]);
}

std::size_t keyed_count(Reader& r, const std::string& key) {
    const auto fields = split_ws(r.line());
    if (fields.size() != 2 || fields[0] != key)
        throw InconsistentHeaderError("expected '" + key + "' line");
    return parse_count(fields[1]);
}

double keyed_double(Reader& r, const std::string& key) {
    const auto fields = split_ws(r.line());
    if (fields.size() != 2 || fields[0] != key)
        throw InconsistentHeaderError("expected '" + key + "' line");
    return parse_double(fields[1]);
}

void append_class_rows(std::string& out, const std::vector<std::string>& names,
                       const std::vector<Split>& splits) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        out += "class " + std::to_string(k) + " " + split_name(splits[k]) + " " +
               names[k] + "\n";
    }
}

void read_class_rows(Reader& r, std::size_t k, std::vector<std::string>& names,
                     std::vector<Split>& splits) {
    for (std::size_t i = 0; i < k; ++i) {
        const auto fields = split_ws(r.line(), 4);
        if (fields.size() != 4 || fields[0] != "class")
            throw InconsistentHeaderError("malformed class row");
        if (parse_count(fields[1]) != i)
            throw InconsistentHeaderError("class rows out of order");
        splits.push_back(split_from_name(fields[2]));
        names.push_back(fields[3]);
    }
}

} // namespace

std::string dataset_to_bytes(const Dataset& ds) {
    ds.validate();
    std::string out = "SIADS 1\n";
    out += "dim " + std::to_string(ds.dim) + "\n";
    out += "classes " + std::to_string(ds.num_classes()) + "\n";
    append_class_rows(out, ds.class_names, ds.class_splits);
    out += "samples " + std::to_string(ds.samples.size()) + "\n";
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const RegionSample& s = ds.samples[i];
        out += "sample " + std::to_string(s.id) + " " + std::to_string(s.image_id) + " " +
               format_double(s.box.x) + " " + format_double(s.box.y) + " " +
               format_double(s.box.w) + " " + format_double(s.box.h) + " " +
               std::to_string(s.label) + " " + std::to_string(i * ds.dim) + "\n";
    }
    out += "blob " + std::to_string(ds.samples.size() * ds.dim) + "\n";
    out.reserve(out.size() + 4 * ds.samples.size() * ds.dim);
    for (const RegionSample& s : ds.samples) {
        for (double v : s.feature) put_f32(out, v);
    }
    return out;
}

Dataset dataset_from_bytes(const std::string& bytes) {
    Reader r(bytes);
    check_magic(r, "SIADS", "dataset");
    Dataset ds;
    ds.dim = keyed_count(r, "dim");
    if (ds.dim == 0) throw InconsistentHeaderError("dataset dimension must be positive");
    const std::size_t k = keyed_count(r, "classes");
    read_class_rows(r, k, ds.class_names, ds.class_splits);
    const std::size_t n = keyed_count(r, "samples");
    ds.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = split_ws(r.line());
        if (fields.size() != 9 || fields[0] != "sample")
            throw InconsistentHeaderError("malformed sample row");
        RegionSample& s = ds.samples[i];
        s.id = parse_i64(fields[1]);
        s.image_id = parse_i64(fields[2]);
        s.box = BoundingBox{parse_double(fields[3]), parse_double(fields[4]),
                            parse_double(fields[5]), parse_double(fields[6])};
        s.label = parse_count(fields[7]);
        if (s.label >= k)
            throw InconsistentHeaderError("sample references a label outside the header");
        s.split = ds.class_splits[s.label];
        if (parse_count(fields[8]) != i * ds.dim)
            throw InconsistentHeaderError("sample blob offset does not match its position");
    }
    const char* blob = r.blob(n * ds.dim);
    for (std::size_t i = 0; i < n; ++i) {
        ds.samples[i].feature.resize(ds.dim);
        for (std::size_t d = 0; d < ds.dim; ++d)
            ds.samples[i].feature[d] = get_f32(blob + 4 * (i * ds.dim + d));
    }
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    write_file_atomic(path, dataset_to_bytes(ds));
}

Dataset load_dataset(const std::string& path) { return dataset_from_bytes(read_file(path)); }

std::string text_bank_to_bytes(const TextEmbeddingBank& bank) {
    bank.validate();
    std::string out = "SIATB 1\n";
    out += "dim " + std::to_string(bank.dim) + "\n";
    out += "classes " + std::to_string(bank.num_classes()) + "\n";
    append_class_rows(out, bank.class_names, bank.class_splits);
    out += "blob " + std::to_string(bank.num_classes() * bank.dim) + "\n";
    for (const auto& col : bank.embeddings) {
        for (double v : col) put_f32(out, v);
    }
    return out;
}

TextEmbeddingBank text_bank_from_bytes(const std::string& bytes) {
    Reader r(bytes);
    check_magic(r, "SIATB", "text bank");
    TextEmbeddingBank bank;
    bank.dim = keyed_count(r, "dim");
    const std::size_t k = keyed_count(r, "classes");
    read_class_rows(r, k, bank.class_names, bank.class_splits);
    const char* blob = r.blob(k * bank.dim);
    bank.embeddings.assign(k, std::vector<double>(bank.dim));
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < bank.dim; ++d)
            bank.embeddings[c][d] = get_f32(blob + 4 * (c * bank.dim + d));
    }
    bank.validate();
    return bank;
}

void save_text_bank(const TextEmbeddingBank& bank, const std::string& path) {
    write_file_atomic(path, text_bank_to_bytes(bank));
}

TextEmbeddingBank load_text_bank(const std::string& path) {
    return text_bank_from_bytes(read_file(path));
}

std::string bank_to_bytes(const AdapterBank& bank) {
    bank.validate();
    std::string out = "SIABK 1\n";
    out += "dim " + std::to_string(bank.dim) + "\n";
    out += "hidden_dim " + std::to_string(bank.hidden_dim) + "\n";
    out += "adapters " + std::to_string(bank.size()) + "\n";
    out += "lambda " + format_double(bank.lambda) + "\n";
    out += "boundaries";
    for (double b : bank.partition.boundaries()) out += " " + format_double(b);
    out += "\n";
    const std::size_t per_adapter = 2 * bank.dim * bank.hidden_dim;
    out += "blob " + std::to_string(bank.size() * per_adapter) + "\n";
    for (const Adapter& a : bank.adapters) {
        for (double v : a.w1.data()) put_f32(out, v);
        for (double v : a.w2.data()) put_f32(out, v);
    }
    return out;
}

AdapterBank bank_from_bytes(const std::string& bytes) {
    Reader r(bytes);
    check_magic(r, "SIABK", "adapter bank");
    AdapterBank bank;
    bank.dim = keyed_count(r, "dim");
    bank.hidden_dim = keyed_count(r, "hidden_dim");
    const std::size_t n = keyed_count(r, "adapters");
    bank.lambda = keyed_double(r, "lambda");

    const auto bfields = split_ws(r.line());
    if (bfields.empty() || bfields[0] != "boundaries")
        throw InconsistentHeaderError("expected 'boundaries' line");
    if (bfields.size() != n + 2)
        throw InconsistentHeaderError("boundary count does not match the adapter count");
    std::vector<double> bounds;
    for (std::size_t i = 1; i < bfields.size(); ++i)
        bounds.push_back(parse_double(bfields[i]));
    bank.partition = BinPartition(std::move(bounds));

    const char* blob = r.blob(n * 2 * bank.dim * bank.hidden_dim);
    bank.adapters.resize(n);
    std::size_t off = 0;
    for (Adapter& a : bank.adapters) {
        a.w1 = Matrix(bank.dim, bank.hidden_dim);
        for (double& v : a.w1.data()) v = get_f32(blob + 4 * off++);
        a.w2 = Matrix(bank.hidden_dim, bank.dim);
        for (double& v : a.w2.data()) v = get_f32(blob + 4 * off++);
    }
    bank.validate();
    return bank;
}

void save_bank(const AdapterBank& bank, const std::string& path) {
    write_file_atomic(path, bank_to_bytes(bank));
}

AdapterBank load_bank(const std::string& path) { return bank_from_bytes(read_file(path)); }

std::string feature_map_to_bytes(const FeatureMap& map) {
    map.validate();
    std::string out = "SIAFM 1\n";
    out += "channels " + std::to_string(map.channels) + "\n";
    out += "height " + std::to_string(map.height) + "\n";
    out += "width " + std::to_string(map.width) + "\n";
    out += "spatial_scale " + format_double(map.spatial_scale) + "\n";
    out += "blob " + std::to_string(map.data.size()) + "\n";
    for (double v : map.data) put_f32(out, v);
    return out;
}

FeatureMap feature_map_from_bytes(const std::string& bytes) {
    Reader r(bytes);
    check_magic(r, "SIAFM", "feature map");
    FeatureMap map;
    map.channels = keyed_count(r, "channels");
    map.height = keyed_count(r, "height");
    map.width = keyed_count(r, "width");
    map.spatial_scale = keyed_double(r, "spatial_scale");
    const char* blob = r.blob(map.channels * map.height * map.width);
    map.data.resize(map.channels * map.height * map.width);
    for (std::size_t i = 0; i < map.data.size(); ++i) map.data[i] = get_f32(blob + 4 * i);
    map.validate();
    return map;
}

void save_feature_map(const FeatureMap& map, const std::string& path) {
    write_file_atomic(path, feature_map_to_bytes(map));
}

FeatureMap load_feature_map(const std::string& path) {
    return feature_map_from_bytes(read_file(path));
}

} // namespace sia
