#include "redlab/coder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "redlab/error.hpp"
#include "redlab/serialize.hpp"

namespace redlab {

void Bitstream::push(bool bit) {
    if (bit_count % 8 == 0) bytes.push_back(0);
    if (bit) bytes.back() |= static_cast<std::uint8_t>(0x80u >> (bit_count % 8));
    ++bit_count;
}

bool Bitstream::bit(std::size_t i) const {
    if (i >= bit_count) return false;
    return (bytes[i / 8] >> (7 - i % 8)) & 1u;
}

namespace {

class IdealPredictor final : public SequentialModel {
public:
    explicit IdealPredictor(const ParamVector& theta) : theta_(theta) {}

    int alphabet_size() const override { return theta_.alphabet_size(); }

    void distribution(std::span<double> out) const override {
        std::span<const double> src;
        if (!started_) {
            src = theta_.initial();
        } else {
            src = theta_.row(theta_.family().kind() == SourceKind::Markov1 ? last_ : 0);
        }
        std::copy(src.begin(), src.end(), out.begin());
    }

    void update(Symbol s) override {
        started_ = true;
        last_ = s;
    }

private:
    ParamVector theta_;
    bool started_ = false;
    Symbol last_ = 0;
};

// Add-1/2 predictor; Markov sources keep one count row per previous symbol
// and code the first symbol uniformly.
class MixturePredictor final : public SequentialModel {
public:
    explicit MixturePredictor(const ParamFamily& family)
        : k_(static_cast<std::size_t>(family.alphabet_size())),
          markov_(family.kind() == SourceKind::Markov1),
          counts_(markov_ ? k_ * k_ : k_, 0),
          totals_(markov_ ? k_ : 1, 0) {}

    int alphabet_size() const override { return static_cast<int>(k_); }

    void distribution(std::span<double> out) const override {
        if (markov_ && !started_) {
            std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(k_));
            return;
        }
        const std::size_t state = markov_ ? last_ : 0;
        const double den = static_cast<double>(totals_[state]) + 0.5 * static_cast<double>(k_);
        for (std::size_t j = 0; j < k_; ++j) out[j] = (static_cast<double>(counts_[state * k_ + j]) + 0.5) / den;
    }

    void update(Symbol s) override {
        if (markov_ && !started_) {
            started_ = true;
            last_ = s;
            return;
        }
        const std::size_t state = markov_ ? last_ : 0;
        ++counts_[state * k_ + s];
        ++totals_[state];
        started_ = true;
        last_ = s;
    }

private:
    std::size_t k_;
    bool markov_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> totals_;
    bool started_ = false;
    Symbol last_ = 0;
};

constexpr int kCodeBits = 62;
constexpr std::uint64_t kTop = (std::uint64_t{1} << kCodeBits) - 1;
constexpr std::uint64_t kHalf = std::uint64_t{1} << (kCodeBits - 1);
constexpr std::uint64_t kQuarter = std::uint64_t{1} << (kCodeBits - 2);
constexpr std::uint64_t kFreqTotal = std::uint64_t{1} << kFrequencyBits;

__extension__ typedef unsigned __int128 u128;

class ArithmeticEncoder {
public:
    explicit ArithmeticEncoder(Bitstream& out) : out_(out) {}

    void encode(std::uint64_t cum_lo, std::uint64_t cum_hi) {
        const std::uint64_t range = high_ - low_ + 1;
        high_ = low_ + static_cast<std::uint64_t>((static_cast<u128>(range) * cum_hi) >> kFrequencyBits) - 1;
        low_ = low_ + static_cast<std::uint64_t>((static_cast<u128>(range) * cum_lo) >> kFrequencyBits);
        for (;;) {
            if (high_ < kHalf) {
                emit(false);
            } else if (low_ >= kHalf) {
                emit(true);
                low_ -= kHalf;
                high_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
                ++pending_;
                low_ -= kQuarter;
                high_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
        }
    }

    void finish() {
        ++pending_;
        emit(low_ >= kQuarter);
    }

private:
    void emit(bool bit) {
        out_.push(bit);
        for (; pending_ > 0; --pending_) out_.push(!bit);
    }

    Bitstream& out_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = kTop;
    std::uint64_t pending_ = 0;
};

class ArithmeticDecoder {
public:
    ArithmeticDecoder(const Bitstream& in, std::size_t start) : in_(in), pos_(start) {
        for (int i = 0; i < kCodeBits; ++i) value_ = (value_ << 1) | next_bit();
    }

    std::size_t decode(std::span<const std::uint64_t> cum) {
        const std::uint64_t range = high_ - low_ + 1;
        const auto target = static_cast<std::uint64_t>(
            ((static_cast<u128>(value_ - low_ + 1) << kFrequencyBits) - 1) / range);
        // First symbol whose upper cumulative bound exceeds target.
        const auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
        if (it == cum.end()) throw DecodeError("arithmetic decoder lost synchronization");
        const auto s = static_cast<std::size_t>(it - cum.begin() - 1);
        high_ = low_ + static_cast<std::uint64_t>((static_cast<u128>(range) * cum[s + 1]) >> kFrequencyBits) - 1;
        low_ = low_ + static_cast<std::uint64_t>((static_cast<u128>(range) * cum[s]) >> kFrequencyBits);
        for (;;) {
            if (high_ < kHalf) {
            } else if (low_ >= kHalf) {
                value_ -= kHalf;
                low_ -= kHalf;
                high_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
                value_ -= kQuarter;
                low_ -= kQuarter;
                high_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
            value_ = (value_ << 1) | next_bit();
            ++shifts_;
        }
        return s;
    }

    /// Bits the matching encoder emitted: one per shift plus two flush bits.
    std::size_t expected_bits() const { return shifts_ + 2; }

private:
    std::uint64_t next_bit() { return in_.bit(pos_++) ? 1 : 0; }

    const Bitstream& in_;
    std::size_t pos_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = kTop;
    std::uint64_t value_ = 0;
    std::size_t shifts_ = 0;
};

std::unique_ptr<SequentialModel> sequential_for(const LengthModel& model, std::size_t grid_index) {
    switch (model.kind()) {
        case ModelKind::IdealTheta: return make_ideal_predictor(model.theta());
        case ModelKind::JeffreysMixture: return make_mixture_predictor(model.family());
        case ModelKind::TwoStage: return make_ideal_predictor(model.grid().point(grid_index));
        case ModelKind::CondTwoStage: break;
    }
    throw ConfigError("conditional two-stage lengths are not sequential and cannot be arithmetic coded");
}

}  // namespace

std::unique_ptr<SequentialModel> make_ideal_predictor(const ParamVector& theta) {
    return std::make_unique<IdealPredictor>(theta);
}

std::unique_ptr<SequentialModel> make_mixture_predictor(const ParamFamily& family) {
    return std::make_unique<MixturePredictor>(family);
}

std::vector<std::uint64_t> quantize_distribution(std::span<const double> probs) {
    std::vector<std::uint64_t> freq(probs.size(), 0);
    std::uint64_t total = 0;
    std::size_t largest = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        const double p = probs[j];
        if (!(p >= 0.0 && p <= 1.0)) throw InvariantError("model produced an invalid probability");
        if (p > 0.0)
            freq[j] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(p * static_cast<double>(kFreqTotal))));
        total += freq[j];
        if (freq[j] > freq[largest]) largest = j;
    }
    if (total == 0) throw InvariantError("model produced an all-zero distribution");
    // Absorb rounding slack in the most probable symbol.
    const auto adjusted = static_cast<std::int64_t>(freq[largest]) +
                          (static_cast<std::int64_t>(kFreqTotal) - static_cast<std::int64_t>(total));
    if (adjusted < 1) throw InvariantError("frequency quantization failed");
    freq[largest] = static_cast<std::uint64_t>(adjusted);
    std::vector<std::uint64_t> cum(probs.size() + 1, 0);
    for (std::size_t j = 0; j < probs.size(); ++j) cum[j + 1] = cum[j] + freq[j];
    return cum;
}

Bitstream encode(const SequenceSample& x, const LengthModel& model) {
    if (!(x.family == model.family())) throw ConfigError("sequence and model families differ");
    if (static_cast<std::int64_t>(x.size()) != model.n())
        throw ConfigError("sequence length does not match model length");
    Bitstream out;
    std::size_t grid_index = 0;
    if (model.kind() == ModelKind::TwoStage) {
        grid_index = ml_estimate(x.symbols, model.grid()).index;
        for (int b = model.grid().bits() - 1; b >= 0; --b) out.push((grid_index >> b) & 1u);
    }
    auto predictor = sequential_for(model, grid_index);
    std::vector<double> dist(static_cast<std::size_t>(predictor->alphabet_size()));
    ArithmeticEncoder enc(out);
    for (std::size_t t = 0; t < x.symbols.size(); ++t) {
        const Symbol s = x.symbols[t];
        predictor->distribution(dist);
        if (dist[s] <= 0.0)
            throw ConfigError("symbol " + std::to_string(s) + " at position " + std::to_string(t) +
                              " has zero probability under the model");
        const auto cum = quantize_distribution(dist);
        enc.encode(cum[s], cum[s + 1]);
        predictor->update(s);
    }
    enc.finish();
    return out;
}

SequenceSample decode(const Bitstream& bits, const LengthModel& model, std::int64_t n) {
    if (n < 1) throw ConfigError("sequence length must be >= 1");
    if (n != model.n()) throw ConfigError("requested length does not match model length");
    std::size_t grid_index = 0;
    std::size_t start = 0;
    if (model.kind() == ModelKind::TwoStage) {
        const auto m = static_cast<std::size_t>(model.grid().bits());
        if (bits.bit_count < m) throw DecodeError("stream truncated inside the grid index");
        for (std::size_t b = 0; b < m; ++b) grid_index = (grid_index << 1) | (bits.bit(b) ? 1u : 0u);
        start = m;
    }
    auto predictor = sequential_for(model, grid_index);
    std::vector<double> dist(static_cast<std::size_t>(predictor->alphabet_size()));
    ArithmeticDecoder dec(bits, start);
    std::vector<Symbol> symbols;
    symbols.reserve(static_cast<std::size_t>(n));
    for (std::int64_t t = 0; t < n; ++t) {
        predictor->distribution(dist);
        const auto cum = quantize_distribution(dist);
        const auto s = static_cast<Symbol>(dec.decode(cum));
        if (dist[s] <= 0.0) throw DecodeError("decoded a zero-probability symbol");
        symbols.push_back(s);
        predictor->update(s);
    }
    if (bits.bit_count != start + dec.expected_bits())
        throw DecodeError("stream length " + std::to_string(bits.bit_count) + " does not match the " +
                          std::to_string(start + dec.expected_bits()) + " bits the decoder consumed (truncated?)");
    return SequenceSample(model.family(), std::move(symbols));
}

namespace {

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(std::span<const std::uint8_t> in, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        if (pos >= in.size()) throw DecodeError("container truncated inside a varint");
        const std::uint8_t byte = in[pos++];
        v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
        if ((byte & 0x80) == 0) return v;
    }
    throw DecodeError("varint too long");
}

constexpr char kMagic[4] = {'U', 'R', 'L', 'B'};

}  // namespace

std::vector<std::uint8_t> write_container(const Container& c) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kContainerVersion);
    const std::string header = c.header.dump();
    put_varint(out, header.size());
    out.insert(out.end(), header.begin(), header.end());
    put_varint(out, static_cast<std::uint64_t>(c.n));
    put_varint(out, c.payload.bit_count);
    out.insert(out.end(), c.payload.bytes.begin(), c.payload.bytes.end());
    return out;
}

Container read_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DecodeError("missing URLB magic");
    if (bytes[4] != kContainerVersion)
        throw DecodeError("unsupported container version " + std::to_string(bytes[4]));
    std::size_t pos = 5;
    const auto json_len = get_varint(bytes, pos);
    if (json_len > bytes.size() - pos) throw DecodeError("container truncated inside the header");
    Container c;
    try {
        c.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + json_len));
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed container header: ") + e.what());
    }
    pos += json_len;
    c.n = static_cast<std::int64_t>(get_varint(bytes, pos));
    c.payload.bit_count = get_varint(bytes, pos);
    const std::size_t need = (c.payload.bit_count + 7) / 8;
    if (bytes.size() - pos != need)
        throw DecodeError("payload has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                          std::to_string(need));
    c.payload.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return c;
}

nlohmann::json model_descriptor(const LengthModel& model) {
    nlohmann::json j = family_to_json(model.family());
    j["model"] = to_string(model.kind());
    switch (model.kind()) {
        case ModelKind::IdealTheta: j["probs"] = std::vector<double>(model.theta().probs().begin(), model.theta().probs().end()); break;
        case ModelKind::TwoStage: j["m"] = model.grid().bits(); break;
        case ModelKind::JeffreysMixture: break;
        case ModelKind::CondTwoStage:
            throw ConfigError("conditional two-stage models have no container form");
    }
    return j;
}

LengthModel model_from_descriptor(const nlohmann::json& header, std::int64_t n) {
    try {
        const auto family = family_from_json(header);
        const auto kind = model_kind_from_string(header.at("model").get<std::string>());
        switch (kind) {
            case ModelKind::IdealTheta: return LengthModel::ideal(param_from_json(header), n);
            case ModelKind::TwoStage:
                return LengthModel::two_stage(
                    std::make_shared<const EstimateGrid>(EstimateGrid::build(family, header.at("m").get<int>())), n);
            case ModelKind::JeffreysMixture: return LengthModel::mixture(family, n);
            case ModelKind::CondTwoStage: break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed model descriptor: ") + e.what());
    } catch (const ConfigError& e) {
        throw DecodeError(std::string("bad model descriptor: ") + e.what());
    }
    throw DecodeError("container model is not sequential");
}

}  // namespace redlab
