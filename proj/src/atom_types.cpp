#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "voxscore/moldata.hpp"

namespace voxscore {

namespace {

struct TypeRow {
  SminaType type;
  std::string_view name;
  std::string_view element;
  std::uint8_t flags;
  bool ligand;
  bool receptor;
};

using namespace flags;

// Rows 0..21 are the published table, in order.
constexpr std::array<TypeRow, 25> kTypeRows{{
    {SminaType::AliphaticCarbonXSHydrophobe, "AliphaticCarbonXSHydrophobe", "C", kHydrophobe, true, true},
    {SminaType::AliphaticCarbonXSNonHydrophobe, "AliphaticCarbonXSNonHydrophobe", "C", 0, true, true},
    {SminaType::AromaticCarbonXSHydrophobe, "AromaticCarbonXSHydrophobe", "C", kAromatic | kHydrophobe, true, true},
    {SminaType::AromaticCarbonXSNonHydrophobe, "AromaticCarbonXSNonHydrophobe", "C", kAromatic, true, true},
    {SminaType::Bromine, "Bromine", "Br", 0, true, false},
    {SminaType::Calcium, "Calcium", "Ca", 0, false, true},
    {SminaType::Chlorine, "Chlorine", "Cl", 0, true, false},
    {SminaType::Fluorine, "Fluorine", "F", 0, true, false},
    {SminaType::Iodine, "Iodine", "I", 0, true, false},
    {SminaType::Iron, "Iron", "Fe", 0, false, true},
    {SminaType::Magnesium, "Magnesium", "Mg", 0, false, true},
    {SminaType::Nitrogen, "Nitrogen", "N", 0, true, true},
    {SminaType::NitrogenXSAcceptor, "NitrogenXSAcceptor", "N", kAcceptor, true, true},
    {SminaType::NitrogenXSDonor, "NitrogenXSDonor", "N", kDonor, true, true},
    {SminaType::NitrogenXSDonorAcceptor, "NitrogenXSDonorAcceptor", "N", kDonor | kAcceptor, true, true},
    {SminaType::Oxygen, "Oxygen", "O", 0, true, false},
    {SminaType::OxygenXSAcceptor, "OxygenXSAcceptor", "O", kAcceptor, true, true},
    {SminaType::OxygenXSDonorAcceptor, "OxygenXSDonorAcceptor", "O", kDonor | kAcceptor, true, true},
    {SminaType::Phosphorus, "Phosphorus", "P", 0, true, true},
    {SminaType::Sulfur, "Sulfur", "S", 0, true, true},
    {SminaType::SulfurAcceptor, "SulfurAcceptor", "S", kAcceptor, true, false},
    {SminaType::Zinc, "Zinc", "Zn", 0, false, true},
    {SminaType::OxygenXSDonor, "OxygenXSDonor", "O", kDonor, false, false},
    {SminaType::Hydrogen, "Hydrogen", "H", 0, false, false},
    {SminaType::Other, "Other", "", 0, false, false},
}};

const TypeRow& row(SminaType t) { return kTypeRows[static_cast<std::size_t>(t)]; }

constexpr std::array<std::string_view, 23> kKnownElements{
    "H", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "Mg", "Ca",
    "Fe", "Zn", "Na", "K", "Mn", "Cu", "Co", "Ni", "Se", "B", "Si"};

constexpr std::array<std::string_view, 9> kLigandElements{
    "C", "N", "O", "S", "P", "F", "Cl", "Br", "I"};
constexpr std::array<std::string_view, 9> kReceptorElements{
    "C", "N", "O", "S", "P", "Ca", "Fe", "Mg", "Zn"};

// smina34 channel tables, built once from the rows above.
struct Smina34Layout {
  std::array<int, kTableTypeCount> ligand{};
  std::array<int, kTableTypeCount> receptor{};
  std::vector<std::pair<Role, SminaType>> channels;

  Smina34Layout() {
    for (std::size_t i = 0; i < kTableTypeCount; ++i) {
      ligand[i] = kDropped;
      if (kTypeRows[i].ligand) {
        ligand[i] = static_cast<int>(channels.size());
        channels.emplace_back(Role::Ligand, kTypeRows[i].type);
      }
    }
    for (std::size_t i = 0; i < kTableTypeCount; ++i) {
      receptor[i] = kDropped;
      if (kTypeRows[i].receptor) {
        receptor[i] = static_cast<int>(channels.size());
        channels.emplace_back(Role::Receptor, kTypeRows[i].type);
      }
    }
  }
};

const Smina34Layout& layout() {
  static const Smina34Layout l;
  return l;
}

int index_of(std::span<const std::string_view> list, std::string_view s) {
  auto it = std::find(list.begin(), list.end(), s);
  return it == list.end() ? kDropped : static_cast<int>(it - list.begin());
}

}  // namespace

std::string_view role_name(Role role) {
  return role == Role::Ligand ? "ligand" : "receptor";
}

std::string_view smina_type_name(SminaType t) { return row(t).name; }

std::optional<SminaType> smina_type_from_name(std::string_view name) {
  for (const auto& r : kTypeRows) {
    if (r.name == name) return r.type;
  }
  return std::nullopt;
}

bool is_known_element(std::string_view symbol) {
  return std::find(kKnownElements.begin(), kKnownElements.end(), symbol) !=
         kKnownElements.end();
}

SminaType resolve_smina_type(std::string_view element, std::uint8_t f) {
  const bool donor = (f & kDonor) != 0;
  const bool acceptor = (f & kAcceptor) != 0;
  if (element == "C") {
    const bool hydrophobe = (f & kHydrophobe) != 0;
    if (f & kAromatic) {
      return hydrophobe ? SminaType::AromaticCarbonXSHydrophobe
                        : SminaType::AromaticCarbonXSNonHydrophobe;
    }
    return hydrophobe ? SminaType::AliphaticCarbonXSHydrophobe
                      : SminaType::AliphaticCarbonXSNonHydrophobe;
  }
  if (element == "N") {
    if (donor && acceptor) return SminaType::NitrogenXSDonorAcceptor;
    if (donor) return SminaType::NitrogenXSDonor;
    if (acceptor) return SminaType::NitrogenXSAcceptor;
    return SminaType::Nitrogen;
  }
  if (element == "O") {
    if (donor && acceptor) return SminaType::OxygenXSDonorAcceptor;
    if (donor) return SminaType::OxygenXSDonor;
    if (acceptor) return SminaType::OxygenXSAcceptor;
    return SminaType::Oxygen;
  }
  if (element == "S") {
    return acceptor ? SminaType::SulfurAcceptor : SminaType::Sulfur;
  }
  if (element == "H") return SminaType::Hydrogen;
  for (std::size_t i = 0; i < kTableTypeCount; ++i) {
    if (kTypeRows[i].element == element) {
      return kTypeRows[i].type;
    }
  }
  return SminaType::Other;
}

bool table_allows(SminaType t, Role role) {
  const auto& r = row(t);
  return role == Role::Ligand ? r.ligand : r.receptor;
}

int smina34_channel(SminaType t, Role role) {
  const auto i = static_cast<std::size_t>(t);
  if (i >= kTableTypeCount) return kDropped;
  return role == Role::Ligand ? layout().ligand[i] : layout().receptor[i];
}

std::pair<Role, SminaType> smina34_type(int channel) {
  const auto& ch = layout().channels;
  if (channel < 0 || static_cast<std::size_t>(channel) >= ch.size()) {
    throw InvalidArgument("smina34 channel out of range: " +
                          std::to_string(channel));
  }
  return ch[static_cast<std::size_t>(channel)];
}

std::pair<std::string, std::uint8_t> smina_type_annotations(SminaType t) {
  const auto& r = row(t);
  return {std::string(r.element), r.flags};
}

std::string_view scheme_name(SchemeName name) {
  switch (name) {
    case SchemeName::Smina34:
      return "smina34";
    case SchemeName::Element18:
      return "element18";
    case SchemeName::Binary2:
      return "binary2";
  }
  return "?";
}

SchemeName scheme_from_name(std::string_view name) {
  if (name == "smina34") return SchemeName::Smina34;
  if (name == "element18") return SchemeName::Element18;
  if (name == "binary2") return SchemeName::Binary2;
  throw InvalidArgument("unknown atom type scheme: " + std::string(name));
}

int AtomTypeScheme::channel_count() const {
  switch (name_) {
    case SchemeName::Smina34:
      return static_cast<int>(layout().channels.size());
    case SchemeName::Element18:
      return static_cast<int>(kLigandElements.size() + kReceptorElements.size());
    case SchemeName::Binary2:
      return 2;
  }
  return 0;
}

int AtomTypeScheme::channel_for(std::string_view element, std::uint8_t f,
                                Role role) const {
  if (element == "H") return kDropped;
  switch (name_) {
    case SchemeName::Smina34:
      return smina34_channel(resolve_smina_type(element, f), role);
    case SchemeName::Element18: {
      if (role == Role::Ligand) return index_of(kLigandElements, element);
      const int idx = index_of(kReceptorElements, element);
      return idx == kDropped
                 ? kDropped
                 : idx + static_cast<int>(kLigandElements.size());
    }
    case SchemeName::Binary2:
      return role == Role::Ligand ? 0 : 1;
  }
  return kDropped;
}

Role AtomTypeScheme::channel_role(int channel) const {
  if (channel < 0 || channel >= channel_count()) {
    throw InvalidArgument("channel out of range: " + std::to_string(channel));
  }
  switch (name_) {
    case SchemeName::Smina34:
      return smina34_type(channel).first;
    case SchemeName::Element18:
      return channel < static_cast<int>(kLigandElements.size())
                 ? Role::Ligand
                 : Role::Receptor;
    case SchemeName::Binary2:
      return channel == 0 ? Role::Ligand : Role::Receptor;
  }
  return Role::Ligand;
}

std::string AtomTypeScheme::channel_name(int channel) const {
  const Role role = channel_role(channel);
  std::string prefix = role == Role::Ligand ? "Lig" : "Rec";
  switch (name_) {
    case SchemeName::Smina34:
      return prefix + std::string(smina_type_name(smina34_type(channel).second));
    case SchemeName::Element18: {
      const auto n = static_cast<int>(kLigandElements.size());
      return prefix + std::string(role == Role::Ligand
                                      ? kLigandElements[channel]
                                      : kReceptorElements[channel - n]);
    }
    case SchemeName::Binary2:
      return prefix;
  }
  return prefix;
}

RadiusTable RadiusTable::defaults() {
  RadiusTable t;
  auto set_type = [&](SminaType type, double r) {
    t.entries_[std::string(smina_type_name(type))] = r;
  };
  for (std::size_t i = 0; i < kTypeRows.size(); ++i) {
    const auto& r = kTypeRows[i];
    double radius = 1.2;  // metals
    if (r.element == "C") radius = 1.9;
    if (r.element == "N") radius = 1.8;
    if (r.element == "O") radius = 1.7;
    if (r.element == "S") radius = 2.0;
    if (r.element == "P") radius = 2.1;
    if (r.element == "F") radius = 1.5;
    if (r.element == "Cl") radius = 1.8;
    if (r.element == "Br") radius = 2.0;
    if (r.element == "I") radius = 2.2;
    if (r.element == "H") radius = 1.1;
    if (r.type != SminaType::Other) set_type(r.type, radius);
  }
  for (std::string_view e : {"Na", "K", "Mn", "Cu", "Co", "Ni"}) {
    t.entries_[std::string(e)] = 1.2;
  }
  t.entries_["Se"] = 2.1;
  t.entries_["B"] = 1.92;
  t.entries_["Si"] = 2.2;
  return t;
}

RadiusTable RadiusTable::parse(std::string_view text) {
  RadiusTable t = defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream fields(line);
    std::string key, value, extra;
    if (!(fields >> key)) continue;
    if (!(fields >> value) || (fields >> extra)) {
      throw DataError("radius table line " + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    double r = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), r);
    if (ec != std::errc() || ptr != value.data() + value.size() || !(r > 0.0)) {
      throw DataError("radius table line " + std::to_string(lineno) +
                      ": radius must be a positive number");
    }
    if (!smina_type_from_name(key) && !is_known_element(key)) {
      throw DataError("radius table line " + std::to_string(lineno) +
                      ": unknown key '" + key + "'");
    }
    t.entries_[key] = r;
  }
  return t;
}

void RadiusTable::set(const std::string& key, double value) {
  if (!(value > 0.0)) throw InvalidArgument("radius must be positive");
  entries_[key] = value;
}

double RadiusTable::radius(std::string_view element, std::uint8_t f) const {
  const SminaType t = resolve_smina_type(element, f);
  const std::string key = t == SminaType::Other
                              ? std::string(element)
                              : std::string(smina_type_name(t));
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw DataError("no van der Waals radius for '" + key + "'");
  }
  return it->second;
}

}  // namespace voxscore
