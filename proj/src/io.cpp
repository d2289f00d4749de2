#include "evolvekit/io.hpp"

#include <fstream>
#include <sstream>

#include "evolvekit/error.hpp"

namespace evolvekit {

namespace {

[[noreturn]] void bad_shape(const std::string& what) {
    throw Error(ErrorCode::ParseError, what);
}

Json parse_document(std::string_view document) {
    try {
        return Json::parse(document.begin(), document.end());
    } catch (const Json::parse_error& e) {
        // Translate the byte offset into line/column for the message.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < document.size(); ++i) {
            if (document[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ParseError, "malformed JSON document", SourceLocation{line, col});
    }
}

const Json& member(const Json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object()) bad_shape(ctx + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) bad_shape(ctx + ": missing field '" + key + "'");
    return *it;
}

std::string string_member(const Json& obj, const char* key, const std::string& ctx) {
    const Json& v = member(obj, key, ctx);
    if (!v.is_string()) bad_shape(ctx + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

const Json* optional_member(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return (it == obj.end() || it->is_null()) ? nullptr : &*it;
}

const Json& array_member(const Json& obj, const char* key, const std::string& ctx,
                         bool optional = true) {
    static const Json empty = Json::array();
    const Json* v = optional_member(obj, key);
    if (!v) {
        if (optional) return empty;
        bad_shape(ctx + ": missing field '" + key + "'");
    }
    if (!v->is_array()) bad_shape(ctx + ": field '" + key + "' must be an array");
    return *v;
}

std::uint32_t nat(const Json& v, const std::string& ctx) {
    if (!v.is_number_unsigned()) bad_shape(ctx + ": expected a natural number");
    return v.get<std::uint32_t>();
}

Multiplicity multiplicity_from_json(const Json* v, const std::string& ctx) {
    Multiplicity m;
    if (!v) return m;
    if (!v->is_object()) bad_shape(ctx + ": multiplicity must be an object");
    if (const Json* lo = optional_member(*v, "min")) m.min = nat(*lo, ctx);
    if (const Json* hi = optional_member(*v, "max")) {
        if (hi->is_string() && hi->get<std::string>() == "many") {
            m.max.reset();
        } else {
            m.max = nat(*hi, ctx);
        }
    }
    return m;
}

Json multiplicity_to_json(const Multiplicity& m) {
    Json out = Json::object();
    out["min"] = m.min;
    out["max"] = m.max ? Json(*m.max) : Json("many");
    return out;
}

AttrType attr_type_from_json(const Json& attr, const std::string& ctx) {
    AttrType t;
    std::string kind = string_member(attr, "type", ctx);
    if (kind == "string") t.kind = PrimitiveKind::String;
    else if (kind == "int") t.kind = PrimitiveKind::Int;
    else if (kind == "float") t.kind = PrimitiveKind::Float;
    else if (kind == "bool") t.kind = PrimitiveKind::Bool;
    else if (kind == "enum") {
        t.kind = PrimitiveKind::Enum;
        for (const auto& v : array_member(attr, "values", ctx, false)) {
            if (!v.is_string()) bad_shape(ctx + ": enum values must be strings");
            t.enumValues.push_back(v.get<std::string>());
        }
    } else {
        bad_shape(ctx + ": unknown attribute type '" + kind + "'");
    }
    return t;
}

}  // namespace

Json literal_to_json(const Literal& value) {
    return std::visit([](const auto& v) { return Json(v); }, value);
}

Literal literal_from_json(const Json& value) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_number_float()) return value.get<double>();
    if (value.is_string()) return value.get<std::string>();
    bad_shape("attribute values must be strings, numbers or booleans");
}

Metamodel metamodel_from_json(const Json& doc) {
    Metamodel mm;
    mm.name = string_member(doc, "name", "metamodel");
    mm.version = string_member(doc, "version", "metamodel");
    for (const auto& jc : array_member(doc, "classes", "metamodel")) {
        MClass c;
        c.name = string_member(jc, "name", "class");
        std::string ctx = "class '" + c.name + "'";
        if (const Json* a = optional_member(jc, "abstract")) {
            if (!a->is_boolean()) bad_shape(ctx + ": 'abstract' must be a boolean");
            c.isAbstract = a->get<bool>();
        }
        if (const Json* s = optional_member(jc, "super")) {
            if (!s->is_string()) bad_shape(ctx + ": 'super' must be a string");
            c.superclass = s->get<std::string>();
        }
        for (const auto& ja : array_member(jc, "attributes", ctx)) {
            MAttribute a;
            a.name = string_member(ja, "name", ctx + " attribute");
            std::string actx = ctx + " attribute '" + a.name + "'";
            a.type = attr_type_from_json(ja, actx);
            if (const Json* r = optional_member(ja, "required")) {
                if (!r->is_boolean()) bad_shape(actx + ": 'required' must be a boolean");
                a.required = r->get<bool>();
            }
            if (const Json* d = optional_member(ja, "default")) {
                a.defaultValue = literal_from_json(*d);
                // Integral literals for float attributes are stored as floats.
                if (a.type.kind == PrimitiveKind::Float)
                    if (auto* i = std::get_if<std::int64_t>(&*a.defaultValue))
                        a.defaultValue = static_cast<double>(*i);
            }
            c.attributes.push_back(std::move(a));
        }
        for (const auto& jk : array_member(jc, "containments", ctx)) {
            MContainment k;
            k.role = string_member(jk, "role", ctx + " containment");
            k.childClass = string_member(jk, "class", ctx + " containment '" + k.role + "'");
            k.mult = multiplicity_from_json(optional_member(jk, "mult"), ctx);
            c.containments.push_back(std::move(k));
        }
        mm.classes.push_back(std::move(c));
    }
    for (const auto& ja : array_member(doc, "associations", "metamodel")) {
        MAssociation a;
        a.name = string_member(ja, "name", "association");
        std::string ctx = "association '" + a.name + "'";
        a.srcClass = string_member(ja, "src", ctx);
        a.dstClass = string_member(ja, "dst", ctx);
        if (optional_member(ja, "srcRole")) a.srcRole = string_member(ja, "srcRole", ctx);
        if (optional_member(ja, "dstRole")) a.dstRole = string_member(ja, "dstRole", ctx);
        a.srcMult = multiplicity_from_json(optional_member(ja, "srcMult"), ctx);
        a.dstMult = multiplicity_from_json(optional_member(ja, "dstMult"), ctx);
        mm.associations.push_back(std::move(a));
    }
    mm.validate();
    return mm;
}

Metamodel load_metamodel(std::string_view document) {
    return metamodel_from_json(parse_document(document));
}

Json metamodel_to_json(const Metamodel& input) {
    Metamodel mm = input;
    mm.normalize();
    Json doc = Json::object();
    doc["name"] = mm.name;
    doc["version"] = mm.version;
    Json classes = Json::array();
    for (const auto& c : mm.classes) {
        Json jc = Json::object();
        jc["name"] = c.name;
        jc["abstract"] = c.isAbstract;
        jc["super"] = c.superclass ? Json(*c.superclass) : Json(nullptr);
        Json attrs = Json::array();
        for (const auto& a : c.attributes) {
            Json ja = Json::object();
            ja["name"] = a.name;
            ja["required"] = a.required;
            if (a.type.kind == PrimitiveKind::Enum) {
                ja["type"] = "enum";
                ja["values"] = a.type.enumValues;
            } else {
                ja["type"] = a.type.name();
            }
            if (a.defaultValue) ja["default"] = literal_to_json(*a.defaultValue);
            attrs.push_back(std::move(ja));
        }
        jc["attributes"] = std::move(attrs);
        Json conts = Json::array();
        for (const auto& k : c.containments) {
            conts.push_back(
                {{"role", k.role}, {"class", k.childClass}, {"mult", multiplicity_to_json(k.mult)}});
        }
        jc["containments"] = std::move(conts);
        classes.push_back(std::move(jc));
    }
    doc["classes"] = std::move(classes);
    Json assocs = Json::array();
    for (const auto& a : mm.associations) {
        assocs.push_back({{"name", a.name},
                          {"src", a.srcClass},
                          {"dst", a.dstClass},
                          {"srcRole", a.srcRole},
                          {"dstRole", a.dstRole},
                          {"srcMult", multiplicity_to_json(a.srcMult)},
                          {"dstMult", multiplicity_to_json(a.dstMult)}});
    }
    doc["associations"] = std::move(assocs);
    return doc;
}

std::string save_metamodel(const Metamodel& mm) { return canonical_dump(metamodel_to_json(mm)); }

Model model_from_json(const Json& doc) {
    Model m;
    m.metamodelName = string_member(doc, "metamodel", "model");
    m.metamodelVersion = string_member(doc, "metamodelVersion", "model");
    for (const auto& r : array_member(doc, "roots", "model")) {
        if (!r.is_string()) bad_shape("model: roots must be ids");
        m.roots.push_back(r.get<std::string>());
    }
    for (const auto& jo : array_member(doc, "objects", "model")) {
        MObject o;
        o.id = string_member(jo, "id", "object");
        std::string ctx = "object '" + o.id + "'";
        o.className = string_member(jo, "class", ctx);
        if (const Json* attrs = optional_member(jo, "attrs")) {
            if (!attrs->is_object()) bad_shape(ctx + ": 'attrs' must be an object");
            for (const auto& [k, v] : attrs->items()) o.attributes[k] = literal_from_json(v);
        }
        if (const Json* kids = optional_member(jo, "children")) {
            if (!kids->is_object()) bad_shape(ctx + ": 'children' must be an object");
            for (const auto& [role, ids] : kids->items()) {
                if (!ids.is_array()) bad_shape(ctx + ": children of '" + role + "' must be an array");
                auto& list = o.children[role];
                for (const auto& id : ids) {
                    if (!id.is_string()) bad_shape(ctx + ": child ids must be strings");
                    list.push_back(id.get<std::string>());
                }
            }
        }
        std::string id = o.id;
        if (!m.objects.emplace(id, std::move(o)).second)
            throw Error(ErrorCode::ModelIllformed, "duplicate object id '" + id + "'");
    }
    for (const auto& jl : array_member(doc, "links", "model")) {
        MLink l;
        l.id = string_member(jl, "id", "link");
        std::string ctx = "link '" + l.id + "'";
        l.association = string_member(jl, "assoc", ctx);
        l.src = string_member(jl, "src", ctx);
        l.dst = string_member(jl, "dst", ctx);
        std::string id = l.id;
        if (!m.links.emplace(id, std::move(l)).second)
            throw Error(ErrorCode::ModelIllformed, "duplicate link id '" + id + "'");
    }
    m.validate();
    return m;
}

Model load_model(std::string_view document) { return model_from_json(parse_document(document)); }

Json model_to_json(const Model& input) {
    Model m = input;
    m.normalize();
    Json doc = Json::object();
    doc["metamodel"] = m.metamodelName;
    doc["metamodelVersion"] = m.metamodelVersion;
    doc["roots"] = m.roots;
    Json objects = Json::array();
    for (const auto& [id, o] : m.objects) {
        Json jo = Json::object();
        jo["id"] = o.id;
        jo["class"] = o.className;
        Json attrs = Json::object();
        for (const auto& [k, v] : o.attributes) attrs[k] = literal_to_json(v);
        jo["attrs"] = std::move(attrs);
        Json kids = Json::object();
        for (const auto& [role, ids] : o.children) kids[role] = ids;
        jo["children"] = std::move(kids);
        objects.push_back(std::move(jo));
    }
    doc["objects"] = std::move(objects);
    Json links = Json::array();
    for (const auto& [id, l] : m.links)
        links.push_back({{"id", l.id}, {"assoc", l.association}, {"src", l.src}, {"dst", l.dst}});
    doc["links"] = std::move(links);
    return doc;
}

std::string save_model(const Model& model) { return canonical_dump(model_to_json(model)); }

Json parse_json(std::string_view document) { return parse_document(document); }

std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace evolvekit
