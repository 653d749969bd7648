#include "pathmark/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "pathmark/rng.hpp"

namespace pathmark {

namespace {

struct EnumSpec {
  const char* name;
  std::vector<const char*> literals;
};

struct Domain {
  const char* name;
  std::vector<const char*> classes;
  std::vector<const char*> attributes;
  std::vector<EnumSpec> enums;
};

const std::vector<Domain>& domains() {
  static const std::vector<Domain> kDomains = {
      {"library",
       {"Library", "Book", "Author", "Publisher", "Loan", "Member", "Shelf", "Catalog", "Copy", "Reservation",
        "Librarian", "Magazine", "Issue", "Chapter", "Edition", "Fine", "Branch", "Periodical", "Review",
        "Subject", "Card", "Series", "Translator", "Index", "Section", "Archive"},
       {"title", "isbn", "pages", "year", "dueDate", "returned", "language", "barcode", "shelfNumber",
        "fineAmount", "published", "volume", "borrowedOn", "abstract", "keywords", "available"},
       {{"Genre", {"fiction", "poetry", "drama", "biography", "science"}},
        {"LoanStatus", {"active", "overdue", "closed"}},
        {"Format", {"hardcover", "paperback", "ebook", "audio"}}}},
      {"banking",
       {"Bank", "Account", "Customer", "Transaction", "Branch", "Loan", "Card", "Statement", "Deposit",
        "Withdrawal", "Transfer", "Teller", "Atm", "Mortgage", "Portfolio", "Fund", "Currency", "Ledger",
        "Payment", "Beneficiary", "Cheque", "Overdraft", "Interest", "Vault", "Advisor", "Audit"},
       {"balance", "iban", "amount", "currencyCode", "openedOn", "interestRate", "overdraftLimit", "swift",
        "pin", "expiry", "holderName", "reference", "bookingDate", "fee", "creditScore", "frozen"},
       {{"AccountType", {"checking", "savings", "business", "joint"}},
        {"TransactionKind", {"debit", "credit", "reversal"}},
        {"RiskLevel", {"low", "medium", "high"}}}},
      {"petrinet",
       {"PetriNet", "Place", "Transition", "Arc", "Token", "Marking", "Page", "InputArc", "OutputArc",
        "InhibitorArc", "Guard", "Firing", "Net", "Node", "Label", "Inscription", "Capacity", "Trace",
        "Step", "Module", "Port", "Fusion", "ColorSet", "Variable", "Binding", "Simulation"},
       {"weight", "tokens", "initialMarking", "capacityLimit", "enabled", "priority", "delay", "rate",
        "expression", "colour", "fired", "bound", "timestamp", "position", "multiplicity", "inhibits"},
       {{"ArcKind", {"normal", "inhibitor", "reset", "read"}},
        {"NetKind", {"placeTransition", "colored", "timed"}},
        {"FiringPolicy", {"race", "preselection", "priorityBased"}}}},
      {"statemachine",
       {"StateMachine", "State", "Transition", "Region", "Event", "Trigger", "Action", "Guard", "Vertex",
        "PseudoState", "FinalState", "CompositeState", "Signal", "Timer", "Effect", "Entry", "Exit",
        "History", "Junction", "Choice", "Fork", "Join", "Behavior", "Activity", "Constraint", "Clock"},
       {"initial", "final", "timeout", "condition", "eventName", "effectBody", "isComposite", "deep",
        "priority", "doActivity", "entryAction", "exitAction", "deferred", "internal", "orthogonal", "after"},
       {{"PseudoKind", {"initial", "deepHistory", "shallowHistory", "junction", "choice"}},
        {"TransitionKind", {"external", "internal", "local"}},
        {"TimerMode", {"oneShot", "periodic"}}}},
      {"university",
       {"University", "Student", "Course", "Professor", "Department", "Lecture", "Exam", "Grade",
        "Enrollment", "Faculty", "Campus", "Semester", "Thesis", "Seminar", "Room", "Schedule",
        "Assignment", "Scholarship", "Program", "Degree", "Module", "Tutor", "Credit", "Laboratory",
        "Library", "Alumni"},
       {"matriculation", "credits", "gradeValue", "semesterYear", "room", "capacity", "ects", "passed",
        "office", "email", "startDate", "endDate", "weekday", "tuition", "major", "gpa"},
       {{"DegreeLevel", {"bachelor", "master", "doctorate"}},
        {"ExamType", {"written", "oral", "project"}},
        {"Weekday", {"monday", "tuesday", "wednesday", "thursday", "friday"}}}},
      {"ecommerce",
       {"Shop", "Product", "Order", "Customer", "Cart", "CartItem", "Invoice", "Payment", "Shipment",
        "Warehouse", "Category", "Discount", "Coupon", "Review", "Supplier", "Catalog", "Price", "Stock",
        "Address", "Refund", "Wishlist", "Vendor", "Checkout", "Delivery", "Tax", "Promotion"},
       {"sku", "price", "quantity", "total", "orderDate", "street", "city", "zipCode", "country", "rating",
        "stockLevel", "discountPercent", "trackingNumber", "vat", "shippedOn", "paid"},
       {{"OrderStatus", {"pending", "paid", "shipped", "delivered", "cancelled"}},
        {"PaymentMethod", {"creditCard", "paypal", "transfer", "cash"}},
        {"ShippingSpeed", {"standard", "express", "overnight"}}}},
      {"hospital",
       {"Hospital", "Patient", "Doctor", "Nurse", "Ward", "Bed", "Appointment", "Diagnosis", "Treatment",
        "Prescription", "Medication", "Surgery", "Admission", "Discharge", "Clinic", "Insurance",
        "LabTest", "Allergy", "Symptom", "Vaccination", "Record", "Pharmacy", "Referral", "Triage",
        "Ambulance", "Visit"},
       {"dosage", "bloodType", "admittedOn", "dischargedOn", "severity", "specialty", "bedNumber",
        "symptoms", "weight", "height", "policyNumber", "frequency", "allergen", "diagnosisCode",
        "temperature", "pulse"},
       {{"Severity", {"mild", "moderate", "severe", "critical"}},
        {"BloodGroup", {"groupA", "groupB", "groupAB", "groupO"}},
        {"WardType", {"icu", "maternity", "pediatric", "surgical"}}}},
      {"railway",
       {"Railway", "Train", "Station", "Track", "Signal", "Platform", "Route", "Switch", "Carriage",
        "Locomotive", "Timetable", "Stop", "Driver", "Ticket", "Passenger", "Line", "Segment", "Junction",
        "Depot", "Crossing", "Sensor", "Block", "Interlocking", "Departure", "Arrival", "Conductor"},
       {"speed", "length", "gauge", "departureTime", "arrivalTime", "platformNumber", "occupied",
        "aspect", "seats", "fare", "kilometre", "direction", "electrified", "maxSpeed", "delayMinutes",
        "trackId"},
       {{"SignalAspect", {"green", "yellow", "red", "flashing"}},
        {"TrainType", {"regional", "intercity", "freight", "highSpeed"}},
        {"SwitchPosition", {"straight", "diverging"}}}},
      {"filesystem",
       {"FileSystem", "File", "Directory", "Drive", "Partition", "Link", "Permission", "Owner", "Group",
        "Volume", "Mount", "Inode", "Block", "Journal", "Snapshot", "Quota", "Archive", "Shortcut",
        "Folder", "Attribute", "Stream", "Handle", "Cluster", "Sector", "Backup", "Trash"},
       {"path", "size", "created", "modified", "readOnly", "hidden", "extension", "checksum",
        "mountPoint", "freeSpace", "blockSize", "uid", "gid", "mode", "compressed", "encrypted"},
       {{"FileKind", {"regular", "directory", "symlink", "device", "socket"}},
        {"AccessRight", {"read", "write", "execute"}},
        {"FsType", {"ext4", "ntfs", "fat", "zfs"}}}},
      {"socialnetwork",
       {"Network", "User", "Profile", "Post", "Comment", "Like", "Friendship", "Group", "Message",
        "Photo", "Album", "Event", "Page", "Follower", "Hashtag", "Notification", "Share", "Story",
        "Invitation", "Feed", "Reaction", "Mention", "Chat", "Poll", "Badge", "Report"},
       {"nickname", "bio", "avatar", "postedAt", "content", "likes", "visibility", "verified",
        "followers", "birthday", "caption", "read", "location", "tags", "muted", "blocked"},
       {{"Visibility", {"public", "friends", "private"}},
        {"ReactionKind", {"like", "love", "laugh", "angry", "sad"}},
        {"RelationshipStatus", {"single", "married", "complicated"}}}},
      {"workflow",
       {"Workflow", "Task", "Activity", "Gateway", "Flow", "Actor", "Role", "Lane", "Pool", "Process",
        "StartEvent", "EndEvent", "Decision", "Merge", "Artifact", "DataObject", "Swimlane", "Milestone",
        "Deadline", "Escalation", "Handler", "Form", "Approval", "Assignment", "Queue", "Step"},
       {"dueDate", "assignee", "priority", "completed", "duration", "condition", "retries", "formKey",
        "candidateGroup", "escalated", "startedAt", "finishedAt", "expression", "loopCount", "async",
        "outcome"},
       {{"GatewayKind", {"exclusive", "parallel", "inclusive", "eventBased"}},
        {"TaskState", {"ready", "running", "suspended", "completed", "failed"}},
        {"Priority", {"low", "normal", "urgent"}}}},
      {"family",
       {"Family", "Person", "Parent", "Child", "Marriage", "Household", "Sibling", "Ancestor", "Birth",
        "Death", "Residence", "Name", "Adoption", "Divorce", "Guardian", "Relative", "Grandparent",
        "Descendant", "Genealogy", "Tree", "Union", "Baptism", "Census", "Occupation", "Surname", "Pedigree"},
       {"firstName", "lastName", "birthDate", "deathDate", "gender", "age", "maidenName", "birthPlace",
        "weddingDate", "living", "occupationTitle", "nationality", "generation", "adopted", "twin",
        "religion"},
       {{"Gender", {"female", "male", "unknown"}},
        {"UnionKind", {"marriage", "partnership", "engagement"}},
        {"Kinship", {"biological", "adoptive", "step"}}}},
  };
  return kDomains;
}

const std::vector<const char*> kGeneralAttributes = {"name", "id", "description", "label", "code", "comment"};
const std::vector<const char*> kClassSuffixes = {"Type", "Kind", "Item", "Entry", "Ref", "Spec", "Group", "Info",
                                                 "Set", "Config", "Detail", "Container"};
const std::vector<const char*> kPackageSuffixes = {"", "Model", "Core", "Meta", "Lang", "Domain"};
const std::vector<const char*> kSyllables = {"zor", "vak", "quil", "bru", "tesh", "nim", "pard", "oxo", "gru",
                                             "flen", "yab", "kiv", "mur", "dax", "pleu", "sno", "wib", "trak"};

std::string lower_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

std::string upper_first(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string rare_word(Rng& rng) {
  std::string w;
  const auto n = 2 + rng.below(2);
  for (std::uint64_t i = 0; i < n; ++i) w += rng.pick(kSyllables);
  return w;
}

// Per-domain habits: which attributes and reference targets a class name
// usually comes with.
struct Conventions {
  std::map<std::string, std::vector<std::string>> attributes;
  std::map<std::string, std::vector<std::string>> targets;
};

Conventions conventions_for(const Domain& d, std::uint64_t seed) {
  Rng rng(seed);
  Conventions c;
  for (const char* cls : d.classes) {
    auto& attrs = c.attributes[cls];
    const auto na = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < na; ++i) attrs.push_back(rng.pick(d.attributes));
    auto& targets = c.targets[cls];
    const auto nt = 1 + rng.below(2);
    for (std::uint64_t i = 0; i < nt; ++i) targets.push_back(rng.pick(d.classes));
  }
  return c;
}

std::size_t log_uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi) + 1.0);
  auto v = static_cast<std::size_t>(std::exp(a + rng.unit() * (b - a)));
  return std::clamp(v, lo, hi);
}

struct ClassDraft {
  std::string id;
  std::string name;
  std::string base;  // domain noun the name was derived from
};

Model ecore_model(const Domain& d, const Conventions& conv, const EcoreCorpusOptions& opt, Rng& rng) {
  Model m;
  m.model_type = "ecore";
  const auto n = log_uniform(rng, std::max<std::size_t>(opt.min_classes, 1), opt.max_classes);

  // Class names: domain nouns first, then compounds.
  std::vector<std::string> nouns(d.classes.begin(), d.classes.end());
  rng.shuffle(nouns);
  std::vector<ClassDraft> classes;
  std::set<std::string> used;
  for (std::size_t i = 0; classes.size() < n; ++i) {
    std::string base = i < nouns.size() ? nouns[i] : rng.pick(nouns);
    std::string name = base;
    if (i >= nouns.size()) {
      name = rng.chance(0.5) ? base + rng.pick(kClassSuffixes) : base + std::string(rng.pick(d.classes));
    }
    if (rng.chance(opt.rare_name_rate)) name = upper_first(rare_word(rng));
    if (!used.insert(name).second) continue;
    classes.push_back({"c" + std::to_string(classes.size()), name, base});
  }
  const bool named_element = n >= 8 && rng.chance(0.4);
  if (named_element) classes.push_back({"c" + std::to_string(classes.size()), "NamedElement", "NamedElement"});

  ModelObject pkg;
  pkg.id = "pkg";
  pkg.class_name = "EPackage";
  pkg.add_attribute("name", std::string(d.name) + rng.pick(kPackageSuffixes));

  std::map<std::string, std::string> id_by_base;
  for (const auto& c : classes) id_by_base.emplace(c.base, c.id);

  std::vector<ModelObject> class_objects;
  std::vector<ModelObject> features;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    ModelObject o;
    o.id = c.id;
    o.class_name = "EClass";
    o.add_attribute("name", c.name);
    pkg.add_reference("eClassifiers", c.id);

    if (c.name != "NamedElement") {
      if (named_element && rng.chance(0.4)) {
        o.add_reference("eSuperTypes", classes.back().id);
      } else if (i > 0 && rng.chance(0.25)) {
        o.add_reference("eSuperTypes", classes[rng.below(i)].id);
      }
    }

    // Attributes.
    std::set<std::string> attr_names;
    const auto na = c.name == "NamedElement" ? 1 : rng.below(5);
    auto conv_attrs = conv.attributes.find(c.base);
    for (std::uint64_t a = 0; a < na; ++a) {
      std::string name;
      if (c.name == "NamedElement") {
        name = "name";
      } else if (conv_attrs != conv.attributes.end() && rng.chance(0.5)) {
        name = rng.pick(conv_attrs->second);
      } else if (rng.chance(0.7)) {
        name = rng.pick(d.attributes);
      } else {
        name = rng.pick(kGeneralAttributes);
      }
      if (rng.chance(opt.rare_name_rate)) name = rare_word(rng);
      if (!attr_names.insert(name).second) continue;
      ModelObject f;
      f.id = c.id + ".a" + std::to_string(a);
      f.class_name = "EAttribute";
      f.add_attribute("name", name);
      o.add_reference("eStructuralFeatures", f.id);
      features.push_back(std::move(f));
    }

    // References.
    const auto nr = rng.below(4);
    auto conv_targets = conv.targets.find(c.base);
    std::set<std::string> ref_names;
    for (std::uint64_t r = 0; r < nr; ++r) {
      const ClassDraft* target = nullptr;
      if (conv_targets != conv.targets.end() && rng.chance(0.5)) {
        auto it = id_by_base.find(rng.pick(conv_targets->second));
        if (it != id_by_base.end()) target = &classes[std::stoul(it->second.substr(1))];
      }
      if (target == nullptr) target = &classes[rng.below(classes.size())];
      std::string name = lower_first(target->name) + (rng.chance(0.5) ? "s" : "");
      if (rng.chance(opt.rare_name_rate)) name = rare_word(rng);
      if (!ref_names.insert(name).second) continue;
      ModelObject f;
      f.id = c.id + ".r" + std::to_string(r);
      f.class_name = "EReference";
      f.add_attribute("name", name);
      f.add_reference("eType", target->id);
      o.add_reference("eStructuralFeatures", f.id);
      features.push_back(std::move(f));
    }
    class_objects.push_back(std::move(o));
  }

  // Enumerations, each used by one attribute.
  std::vector<ModelObject> enums;
  const auto ne = rng.below(std::min<std::size_t>(d.enums.size(), 1 + n / 10) + 1);
  std::vector<std::size_t> order(d.enums.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& spec = d.enums[order[e]];
    ModelObject en;
    en.id = "e" + std::to_string(e);
    en.class_name = "EEnum";
    en.add_attribute("name", spec.name);
    pkg.add_reference("eClassifiers", en.id);
    std::vector<const char*> lits = spec.literals;
    rng.shuffle(lits);
    const auto nl = 2 + rng.below(lits.size() - 1);
    for (std::size_t l = 0; l < nl; ++l) {
      ModelObject lit;
      lit.id = en.id + ".l" + std::to_string(l);
      lit.class_name = "EEnumLiteral";
      lit.add_attribute("name", lits[l]);
      en.add_reference("eLiterals", lit.id);
      enums.push_back(std::move(lit));
    }
    auto& owner = class_objects[rng.below(class_objects.size())];
    ModelObject f;
    f.id = owner.id + ".t" + std::to_string(e);
    f.class_name = "EAttribute";
    f.add_attribute("name", lower_first(spec.name));
    f.add_reference("eType", en.id);
    owner.add_reference("eStructuralFeatures", f.id);
    features.push_back(std::move(f));
    enums.insert(enums.end() - static_cast<std::ptrdiff_t>(nl), std::move(en));
  }

  m.objects.push_back(std::move(pkg));
  for (auto& o : class_objects) m.objects.push_back(std::move(o));
  for (auto& o : features) m.objects.push_back(std::move(o));
  for (auto& o : enums) m.objects.push_back(std::move(o));
  return m;
}

// Copy of `base` with about a tenth of its features dropped, a tenth of its
// names replaced by domain words and a few attributes added.
Model variant_of(const Model& base, const Domain& d, Rng& rng) {
  Model m = base;
  std::set<std::string> drop;
  for (const auto& o : m.objects) {
    if ((o.class_name == "EAttribute" || o.class_name == "EReference") && rng.chance(0.1)) drop.insert(o.id);
  }
  std::erase_if(m.objects, [&](const ModelObject& o) { return drop.contains(o.id); });
  std::size_t added = 0;
  std::vector<ModelObject> extra;
  for (auto& o : m.objects) {
    for (auto& [ref, targets] : o.references) {
      std::erase_if(targets, [&](const std::string& t) { return drop.contains(t); });
    }
    std::erase_if(o.references, [](const auto& kv) { return kv.second.empty(); });
    const bool named = o.class_name == "EClass" || o.class_name == "EAttribute" || o.class_name == "EReference";
    if (named && rng.chance(0.1)) {
      for (auto& [attr, values] : o.attributes) {
        if (attr != "name") continue;
        values = {o.class_name == "EClass" ? std::string(rng.pick(d.classes)) : std::string(rng.pick(d.attributes))};
      }
    }
    if (o.class_name == "EClass" && rng.chance(0.1)) {
      ModelObject f;
      f.id = o.id + ".v" + std::to_string(added++);
      f.class_name = "EAttribute";
      f.add_attribute("name", rng.pick(d.attributes));
      o.add_reference("eStructuralFeatures", f.id);
      extra.push_back(std::move(f));
    }
  }
  for (auto& f : extra) m.objects.push_back(std::move(f));
  return m;
}

const std::vector<std::vector<const char*>> kDeviceStates = {
    {"Off", "Standby", "Heating", "Brewing", "Ready", "Descaling"},
    {"Locked", "Unlocked", "Open", "Closed", "Alarm"},
    {"Idle", "Selecting", "Paying", "Dispensing", "Refunding", "Out of order"},
    {"Stopped", "Playing", "Paused", "Buffering", "Seeking"},
    {"Red", "Green", "Amber", "Blinking", "Maintenance"},
    {"Empty", "Filling", "Washing", "Rinsing", "Spinning", "Draining", "Done"},
    {"Parked", "Driving", "Reversing", "Charging", "Waiting for driver"},
    {"Logged out", "Authenticating", "Browsing", "Checking out", "Confirmed"},
};

const std::vector<const char*> kTriggers = {"press button", "timeout", "insert coin", "cancel", "power on",
                                            "power off", "door opened", "door closed", "select item", "pay",
                                            "error", "reset", "start", "stop", "resume", "pause", "finish",
                                            "call received", "plug in", "unplug", "wait", "hold"};

}  // namespace

std::vector<std::string> ecore_domains() {
  std::vector<std::string> out;
  for (const auto& d : domains()) out.emplace_back(d.name);
  return out;
}

std::vector<CorpusModel> generate_ecore_corpus(const EcoreCorpusOptions& options) {
  if (options.domains == 0 || options.domains > domains().size()) {
    throw ContractError("domains must lie in [1, " + std::to_string(domains().size()) + "]");
  }
  if (options.min_classes == 0 || options.min_classes > options.max_classes) {
    throw ContractError("invalid class count range");
  }
  std::vector<Conventions> conv;
  for (std::size_t d = 0; d < options.domains; ++d) conv.push_back(conventions_for(domains()[d], options.seed + d));
  Rng rng(options.seed);
  std::vector<CorpusModel> out;
  out.reserve(options.models);
  const auto width = std::to_string(options.models).size();
  for (std::size_t i = 0; i < options.models; ++i) {
    const auto d = i % options.domains;
    auto number = std::to_string(i);
    number.insert(0, width - number.size(), '0');
    CorpusModel cm;
    cm.label = domains()[d].name;
    cm.id = cm.label + "-" + number;
    if (i >= options.domains && rng.chance(options.variant_rate)) {
      const auto earlier = rng.below(i / options.domains);
      cm.model = variant_of(out[d + earlier * options.domains].model, domains()[d], rng);
    } else {
      cm.model = ecore_model(domains()[d], conv[d], options, rng);
    }
    cm.model.source_uri = cm.id + ".json";
    out.push_back(std::move(cm));
  }
  return out;
}

std::vector<CorpusModel> generate_state_machines(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CorpusModel> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& vocab = kDeviceStates[rng.below(kDeviceStates.size())];
    std::vector<const char*> states = vocab;
    rng.shuffle(states);
    states.resize(3 + rng.below(states.size() - 2));

    Model m;
    m.model_type = "uml";
    ModelObject sm{"sm", "StateMachine", {}, {}};
    sm.add_attribute("name", std::string(states[0]) + " controller");
    sm.add_reference("region", "r");
    ModelObject region{"r", "Region", {}, {}};
    ModelObject init{"init", "PseudoState", {}, {}};
    init.add_attribute("kind", "initial");
    init.add_reference("container", "r");
    region.add_reference("subvertex", "init");
    std::vector<ModelObject> objects;
    for (std::size_t s = 0; s < states.size(); ++s) {
      ModelObject st{"s" + std::to_string(s), "State", {}, {}};
      st.add_attribute("name", states[s]);
      st.add_reference("container", "r");
      region.add_reference("subvertex", st.id);
      objects.push_back(std::move(st));
    }
    auto add_transition = [&](const std::string& src, const std::string& dst, const char* name) {
      ModelObject t{"t" + std::to_string(objects.size()), "Transition", {}, {}};
      if (name != nullptr) t.add_attribute("name", name);
      t.add_attribute("kind", "external");
      t.add_reference("source", src);
      t.add_reference("target", dst);
      t.add_reference("container", "r");
      region.add_reference("transition", t.id);
      objects.push_back(std::move(t));
    };
    add_transition("init", "s0", nullptr);
    const auto nt = states.size() + rng.below(states.size());
    for (std::size_t t = 0; t < nt; ++t) {
      const auto a = rng.below(states.size());
      auto b = rng.below(states.size());
      if (a == b) b = (b + 1) % states.size();
      add_transition("s" + std::to_string(a), "s" + std::to_string(b), rng.pick(kTriggers));
    }
    m.objects.push_back(std::move(sm));
    m.objects.push_back(std::move(region));
    m.objects.push_back(std::move(init));
    for (auto& o : objects) m.objects.push_back(std::move(o));
    out.push_back({"sm-" + std::to_string(i), "statemachine", std::move(m)});
  }
  return out;
}

std::size_t element_count(const Model& m) {
  std::size_t ecore = 0;
  bool is_ecore = false;
  for (const auto& o : m.objects) {
    if (o.class_name == "EClass" || o.class_name == "EAttribute" || o.class_name == "EReference") ++ecore;
    if (o.class_name == "EPackage" || o.class_name == "EClass") is_ecore = true;
  }
  return is_ecore ? ecore : m.objects.size();
}

}  // namespace pathmark
