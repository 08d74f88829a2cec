//! Parsing of the supported XACML 2.0 subset into the model, plus emitting
//! of XACML context requests and responses.
//!
//! Supported policy constructs: `PolicySet`/`Policy`/`Rule`, targets over the
//! four dimensions with `string-equal` matches, and conditions built from
//! `Apply` trees of and/or/not/string-equal (with the `*-one-and-only`
//! designator wrappers). Anything else fails loudly with
//! [`XacmlError::UnsupportedFeature`] instead of being silently skipped:
//! a skipped construct would corrupt the trace sets derived downstream.

use std::fmt::Write as _;
use std::path::Path;

use roxmltree::Node;
use thiserror::Error;

use crate::model::{
    AttributeValue, Category, CombiningAlgorithm, ConditionExpr, Decision, Effect, Policy,
    PolicySet, RequestTuple, Rule, TargetTuple,
};

/// XML namespace of XACML 2.0 policy documents.
pub const POLICY_NS: &str = "urn:oasis:names:tc:xacml:2.0:policy:schema:os";
/// XML namespace of XACML 2.0 context (request/response) documents.
pub const CONTEXT_NS: &str = "urn:oasis:names:tc:xacml:2.0:context:schema:os";

const FN_AND: &str = "urn:oasis:names:tc:xacml:1.0:function:and";
const FN_OR: &str = "urn:oasis:names:tc:xacml:1.0:function:or";
const FN_NOT: &str = "urn:oasis:names:tc:xacml:1.0:function:not";
const FN_STRING_EQUAL: &str = "urn:oasis:names:tc:xacml:1.0:function:string-equal";

const RULE_COMBINING_PREFIX: &str = "urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:";
const POLICY_COMBINING_PREFIX: &str = "urn:oasis:names:tc:xacml:1.0:policy-combining-algorithm:";

#[derive(Debug, Error)]
pub enum XacmlError {
    #[error("xml syntax error: {0}")]
    XmlSyntax(String),
    #[error("unsupported feature at {path}: {detail}")]
    UnsupportedFeature { path: String, detail: String },
    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn unsupported(node: Node, detail: impl Into<String>) -> XacmlError {
    XacmlError::UnsupportedFeature {
        path: node_path(node),
        detail: detail.into(),
    }
}

fn schema_err(node: Node, detail: impl Into<String>) -> XacmlError {
    XacmlError::Schema {
        path: node_path(node),
        detail: detail.into(),
    }
}

/// Element path like `/PolicySet/Policy/Rule[ruleC]/Condition/Apply` for
/// error messages.
fn node_path(node: Node) -> String {
    let mut parts = Vec::new();
    let mut cur = Some(node);
    while let Some(n) = cur {
        if n.is_element() {
            let mut part = n.tag_name().name().to_string();
            for id_attr in ["PolicySetId", "PolicyId", "RuleId"] {
                if let Some(id) = n.attribute(id_attr) {
                    let _ = write!(part, "[{id}]");
                    break;
                }
            }
            parts.push(part);
        }
        cur = n.parent();
    }
    parts.reverse();
    format!("/{}", parts.join("/"))
}

/// A parsed policy document together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDocument {
    pub root: PolicySet,
    pub source_uri: String,
}

/// A parsed request document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestDocument {
    pub tuple: RequestTuple,
}

/// A response document carrying exactly one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseDocument {
    pub decision: Decision,
}

/// Read and parse a policy file.
pub fn load_policy(path: impl AsRef<Path>) -> Result<PolicyDocument, XacmlError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Ok(PolicyDocument {
        root: parse_policy(&text)?,
        source_uri: path.display().to_string(),
    })
}

/// Read and parse a request file.
pub fn load_request(path: impl AsRef<Path>) -> Result<RequestDocument, XacmlError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(RequestDocument {
        tuple: parse_request(&text)?,
    })
}

/// Parse a policy document. A bare `Policy` root is accepted and wrapped in
/// a synthetic `PolicySet` with an empty target and first-applicable
/// combining, so the rule-target chains always have a PolicySet entry.
pub fn parse_policy(xml_text: &str) -> Result<PolicySet, XacmlError> {
    let doc =
        roxmltree::Document::parse(xml_text).map_err(|e| XacmlError::XmlSyntax(e.to_string()))?;
    let root = doc.root_element();
    match root.tag_name().name() {
        "PolicySet" => parse_policy_set(root),
        "Policy" => {
            let policy = parse_policy_element(root)?;
            Ok(PolicySet {
                id: format!("{}-policyset", policy.id),
                target: TargetTuple::any(),
                policies: vec![policy],
                policy_combining: CombiningAlgorithm::FirstApplicable,
            })
        }
        other => Err(unsupported(
            root,
            format!("expected PolicySet or Policy root, found {other}"),
        )),
    }
}

fn required_attribute<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str, XacmlError> {
    node.attribute(name)
        .ok_or_else(|| schema_err(node, format!("missing required attribute {name}")))
}

fn element_children<'a, 'd>(node: Node<'a, 'd>) -> impl Iterator<Item = Node<'a, 'd>> {
    node.children().filter(|c| c.is_element())
}

fn parse_policy_set(node: Node) -> Result<PolicySet, XacmlError> {
    let id = required_attribute(node, "PolicySetId")?.to_string();
    let combining = parse_combining(node, "PolicyCombiningAlgId", POLICY_COMBINING_PREFIX)?;
    let mut target = TargetTuple::any();
    let mut policies = Vec::new();
    for child in element_children(node) {
        match child.tag_name().name() {
            "Target" => target = parse_target(child)?,
            "Policy" => policies.push(parse_policy_element(child)?),
            "Description" => {}
            other => return Err(unsupported(child, format!("unknown element {other}"))),
        }
    }
    if policies.is_empty() {
        return Err(schema_err(node, "PolicySet contains no Policy"));
    }
    Ok(PolicySet {
        id,
        target,
        policies,
        policy_combining: combining,
    })
}

fn parse_policy_element(node: Node) -> Result<Policy, XacmlError> {
    let id = required_attribute(node, "PolicyId")?.to_string();
    let combining = parse_combining(node, "RuleCombiningAlgId", RULE_COMBINING_PREFIX)?;
    let mut target = TargetTuple::any();
    let mut rules = Vec::new();
    for child in element_children(node) {
        match child.tag_name().name() {
            "Target" => target = parse_target(child)?,
            "Rule" => rules.push(parse_rule(child)?),
            "Description" => {}
            other => return Err(unsupported(child, format!("unknown element {other}"))),
        }
    }
    if rules.is_empty() {
        return Err(schema_err(node, "Policy contains no Rule"));
    }
    Ok(Policy {
        id,
        target,
        rules,
        rule_combining: combining,
    })
}

fn parse_combining(node: Node, attr: &str, prefix: &str) -> Result<CombiningAlgorithm, XacmlError> {
    let uri = required_attribute(node, attr)?;
    match uri.strip_prefix(prefix) {
        Some("first-applicable") => Ok(CombiningAlgorithm::FirstApplicable),
        Some("permit-overrides") => Ok(CombiningAlgorithm::PermitOverrides),
        Some("deny-overrides") => Ok(CombiningAlgorithm::DenyOverrides),
        _ => Err(unsupported(node, format!("combining algorithm {uri}"))),
    }
}

fn parse_rule(node: Node) -> Result<Rule, XacmlError> {
    let id = required_attribute(node, "RuleId")?.to_string();
    let effect = match required_attribute(node, "Effect")? {
        "Permit" => Effect::Permit,
        "Deny" => Effect::Deny,
        other => return Err(schema_err(node, format!("unknown Effect {other}"))),
    };
    let mut target = TargetTuple::any();
    let mut condition = None;
    for child in element_children(node) {
        match child.tag_name().name() {
            "Target" => target = parse_target(child)?,
            "Condition" => condition = Some(parse_condition(child)?),
            "Description" => {}
            other => return Err(unsupported(child, format!("unknown element {other}"))),
        }
    }
    Ok(Rule {
        id,
        target,
        condition,
        effect,
    })
}

/// Per-dimension element vocabulary: section, entry, match, designator.
const DIMENSIONS: [(Category, &str, &str, &str, &str); 4] = [
    (
        Category::Subject,
        "Subjects",
        "Subject",
        "SubjectMatch",
        "SubjectAttributeDesignator",
    ),
    (
        Category::Resource,
        "Resources",
        "Resource",
        "ResourceMatch",
        "ResourceAttributeDesignator",
    ),
    (
        Category::Action,
        "Actions",
        "Action",
        "ActionMatch",
        "ActionAttributeDesignator",
    ),
    (
        Category::Environment,
        "Environments",
        "Environment",
        "EnvironmentMatch",
        "EnvironmentAttributeDesignator",
    ),
];

fn dimension_by_section(name: &str) -> Option<(Category, &str, &str, &str)> {
    DIMENSIONS
        .iter()
        .find(|(_, section, ..)| *section == name)
        .map(|&(c, _, entry, m, d)| (c, entry, m, d))
}

fn parse_target(node: Node) -> Result<TargetTuple, XacmlError> {
    let mut tuple = TargetTuple::any();
    for section in element_children(node) {
        let name = section.tag_name().name();
        let Some((category, entry_name, match_name, designator_name)) = dimension_by_section(name)
        else {
            return Err(unsupported(section, format!("unknown element {name}")));
        };
        for entry in element_children(section) {
            if entry.tag_name().name() != entry_name {
                return Err(unsupported(
                    entry,
                    format!("expected {entry_name} inside {name}"),
                ));
            }
            let matches: Vec<_> = element_children(entry).collect();
            if matches.is_empty() {
                return Err(schema_err(
                    entry,
                    format!("{entry_name} without {match_name}"),
                ));
            }
            if matches.len() > 1 {
                // A conjunction of matches within one entry is not expressible
                // in the per-dimension value-set model.
                return Err(unsupported(
                    entry,
                    format!("multiple {match_name} elements in one {entry_name}"),
                ));
            }
            for m in matches {
                if m.tag_name().name() != match_name {
                    return Err(unsupported(
                        m,
                        format!("expected {match_name} inside {entry_name}"),
                    ));
                }
                tuple.insert(parse_match(m, category, designator_name)?);
            }
        }
    }
    Ok(tuple)
}

fn parse_match(
    node: Node,
    category: Category,
    designator_name: &str,
) -> Result<AttributeValue, XacmlError> {
    let match_id = required_attribute(node, "MatchId")?;
    if match_id != FN_STRING_EQUAL {
        return Err(unsupported(node, format!("match function {match_id}")));
    }
    let mut literal = None;
    let mut designator = None;
    for child in element_children(node) {
        match child.tag_name().name() {
            "AttributeValue" => literal = Some(parse_literal(child)?),
            name if name == designator_name => {
                designator = Some(required_attribute(child, "AttributeId")?.to_string());
            }
            other => return Err(unsupported(child, format!("unknown element {other}"))),
        }
    }
    let (data_type, value) = literal.ok_or_else(|| schema_err(node, "missing AttributeValue"))?;
    let attribute_id =
        designator.ok_or_else(|| schema_err(node, format!("missing {designator_name}")))?;
    if value.is_empty() {
        return Err(schema_err(node, "empty AttributeValue literal"));
    }
    Ok(AttributeValue::new(category, attribute_id, value).with_data_type(data_type))
}

fn parse_literal(node: Node) -> Result<(String, String), XacmlError> {
    let data_type = required_attribute(node, "DataType")?.to_string();
    let value = node.text().unwrap_or_default().to_string();
    Ok((data_type, value))
}

fn parse_condition(node: Node) -> Result<ConditionExpr, XacmlError> {
    let children: Vec<_> = element_children(node).collect();
    match children.as_slice() {
        [expr] => parse_apply(*expr),
        _ => Err(schema_err(
            node,
            "Condition must contain exactly one expression",
        )),
    }
}

fn parse_apply(node: Node) -> Result<ConditionExpr, XacmlError> {
    if node.tag_name().name() != "Apply" {
        return Err(unsupported(
            node,
            format!("expected Apply, found {}", node.tag_name().name()),
        ));
    }
    let function = required_attribute(node, "FunctionId")?;
    match function {
        FN_AND | FN_OR => {
            let items = element_children(node)
                .map(parse_apply)
                .collect::<Result<Vec<_>, _>>()?;
            if items.is_empty() {
                return Err(schema_err(node, "empty boolean connective"));
            }
            Ok(if function == FN_AND {
                ConditionExpr::And(items)
            } else {
                ConditionExpr::Or(items)
            })
        }
        FN_NOT => {
            let items = element_children(node)
                .map(parse_apply)
                .collect::<Result<Vec<_>, _>>()?;
            match items.into_iter().next() {
                Some(inner) => Ok(ConditionExpr::Not(Box::new(inner))),
                None => Err(schema_err(node, "not takes one argument")),
            }
        }
        FN_STRING_EQUAL => parse_equality(node),
        other => Err(unsupported(node, format!("function {other}"))),
    }
}

/// `string-equal` over a designator (optionally wrapped in a
/// `*-one-and-only` Apply) and a literal, in either order.
fn parse_equality(node: Node) -> Result<ConditionExpr, XacmlError> {
    let mut literal = None;
    let mut designator = None;
    for child in element_children(node) {
        match child.tag_name().name() {
            "AttributeValue" => literal = Some(parse_literal(child)?),
            "Apply" => {
                let function = required_attribute(child, "FunctionId")?;
                if !function.ends_with("-one-and-only") {
                    return Err(unsupported(child, format!("function {function}")));
                }
                let inner: Vec<_> = element_children(child).collect();
                match inner.as_slice() {
                    [d] => designator = Some(parse_designator(*d)?),
                    _ => return Err(schema_err(child, "one-and-only takes a single designator")),
                }
            }
            _ => designator = Some(parse_designator(child)?),
        }
    }
    let (data_type, value) =
        literal.ok_or_else(|| schema_err(node, "equality needs a literal operand"))?;
    let (category, attribute_id) =
        designator.ok_or_else(|| schema_err(node, "equality needs a designator operand"))?;
    if value.is_empty() {
        return Err(schema_err(node, "empty AttributeValue literal"));
    }
    Ok(ConditionExpr::Predicate(
        AttributeValue::new(category, attribute_id, value).with_data_type(data_type),
    ))
}

fn parse_designator(node: Node) -> Result<(Category, String), XacmlError> {
    let name = node.tag_name().name();
    let category = DIMENSIONS
        .iter()
        .find(|(_, _, _, _, designator)| *designator == name)
        .map(|&(c, ..)| c)
        .ok_or_else(|| unsupported(node, format!("unknown element {name}")))?;
    Ok((
        category,
        required_attribute(node, "AttributeId")?.to_string(),
    ))
}

/// Parse an XACML 2.0 context request into a request tuple. Attributes are
/// categorized by their enclosing Subject/Resource/Action/Environment
/// element; multiple section elements per dimension are unioned.
pub fn parse_request(xml_text: &str) -> Result<RequestTuple, XacmlError> {
    let doc =
        roxmltree::Document::parse(xml_text).map_err(|e| XacmlError::XmlSyntax(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "Request" {
        return Err(unsupported(
            root,
            format!("expected Request root, found {}", root.tag_name().name()),
        ));
    }
    let mut tuple = RequestTuple::empty();
    for section in element_children(root) {
        let category = match section.tag_name().name() {
            "Subject" => Category::Subject,
            "Resource" => Category::Resource,
            "Action" => Category::Action,
            "Environment" => Category::Environment,
            other => return Err(unsupported(section, format!("unknown element {other}"))),
        };
        for attribute in element_children(section) {
            if attribute.tag_name().name() != "Attribute" {
                return Err(unsupported(
                    attribute,
                    format!("unknown element {}", attribute.tag_name().name()),
                ));
            }
            let attribute_id = required_attribute(attribute, "AttributeId")?.to_string();
            let data_type = required_attribute(attribute, "DataType")?.to_string();
            for value_node in element_children(attribute) {
                if value_node.tag_name().name() != "AttributeValue" {
                    return Err(unsupported(
                        value_node,
                        format!("unknown element {}", value_node.tag_name().name()),
                    ));
                }
                let value = value_node.text().unwrap_or_default().to_string();
                if value.is_empty() {
                    return Err(schema_err(value_node, "empty AttributeValue literal"));
                }
                tuple.insert(
                    AttributeValue::new(category, attribute_id.clone(), value)
                        .with_data_type(data_type.clone()),
                );
            }
        }
    }
    Ok(tuple)
}

/// Emit a policy set in the supported subset. Formatting is normalized, so
/// `parse_policy(emit_policy(&parse_policy(x)?))` is structurally identical
/// to `parse_policy(x)`.
pub fn emit_policy(ps: &PolicySet) -> String {
    let mut out = String::with_capacity(2048);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<PolicySet xmlns=\"{POLICY_NS}\"");
    let _ = writeln!(out, "           PolicySetId=\"{}\"", attr_escaped(&ps.id));
    let _ = writeln!(
        out,
        "           PolicyCombiningAlgId=\"{}{}\">",
        POLICY_COMBINING_PREFIX,
        combining_name(ps.policy_combining)
    );
    emit_target(&ps.target, 1, &mut out);
    for policy in &ps.policies {
        let _ = writeln!(
            out,
            "  <Policy PolicyId=\"{}\"\n          RuleCombiningAlgId=\"{}{}\">",
            attr_escaped(&policy.id),
            RULE_COMBINING_PREFIX,
            combining_name(policy.rule_combining)
        );
        emit_target(&policy.target, 2, &mut out);
        for rule in &policy.rules {
            let _ = writeln!(
                out,
                "    <Rule RuleId=\"{}\" Effect=\"{}\">",
                attr_escaped(&rule.id),
                rule.effect
            );
            if !rule.target.is_any() {
                emit_target(&rule.target, 3, &mut out);
            }
            if let Some(condition) = &rule.condition {
                let _ = writeln!(out, "      <Condition>");
                emit_condition_expr(condition, 4, &mut out);
                let _ = writeln!(out, "      </Condition>");
            }
            let _ = writeln!(out, "    </Rule>");
        }
        let _ = writeln!(out, "  </Policy>");
    }
    out.push_str("</PolicySet>\n");
    out
}

fn combining_name(algorithm: CombiningAlgorithm) -> &'static str {
    match algorithm {
        CombiningAlgorithm::FirstApplicable => "first-applicable",
        CombiningAlgorithm::PermitOverrides => "permit-overrides",
        CombiningAlgorithm::DenyOverrides => "deny-overrides",
    }
}

fn attr_escaped(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    escape_xml(text, &mut out);
    out
}

fn emit_target(tuple: &TargetTuple, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    if tuple.is_any() {
        let _ = writeln!(out, "{pad}<Target/>");
        return;
    }
    let _ = writeln!(out, "{pad}<Target>");
    for &(category, section, entry, match_name, designator) in &DIMENSIONS {
        let values = tuple.dimension(category);
        if values.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{pad}  <{section}>");
        for v in values {
            let _ = writeln!(out, "{pad}    <{entry}>");
            let _ = writeln!(
                out,
                "{pad}      <{match_name} MatchId=\"{FN_STRING_EQUAL}\">"
            );
            let _ = writeln!(
                out,
                "{pad}        <AttributeValue DataType=\"{}\">{}</AttributeValue>",
                attr_escaped(&v.data_type),
                attr_escaped(&v.value)
            );
            let _ = writeln!(
                out,
                "{pad}        <{designator} AttributeId=\"{}\" DataType=\"{}\"/>",
                attr_escaped(&v.attribute_id),
                attr_escaped(&v.data_type)
            );
            let _ = writeln!(out, "{pad}      </{match_name}>");
            let _ = writeln!(out, "{pad}    </{entry}>");
        }
        let _ = writeln!(out, "{pad}  </{section}>");
    }
    let _ = writeln!(out, "{pad}</Target>");
}

const FN_ONE_AND_ONLY: &str = "urn:oasis:names:tc:xacml:1.0:function:string-one-and-only";

fn emit_condition_expr(expr: &ConditionExpr, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match expr {
        ConditionExpr::And(items) | ConditionExpr::Or(items) => {
            let function = if matches!(expr, ConditionExpr::And(_)) {
                FN_AND
            } else {
                FN_OR
            };
            let _ = writeln!(out, "{pad}<Apply FunctionId=\"{function}\">");
            for item in items {
                emit_condition_expr(item, depth + 1, out);
            }
            let _ = writeln!(out, "{pad}</Apply>");
        }
        ConditionExpr::Not(inner) => {
            let _ = writeln!(out, "{pad}<Apply FunctionId=\"{FN_NOT}\">");
            emit_condition_expr(inner, depth + 1, out);
            let _ = writeln!(out, "{pad}</Apply>");
        }
        ConditionExpr::Predicate(v) => {
            let designator = DIMENSIONS[v.category.index()].4;
            let _ = writeln!(out, "{pad}<Apply FunctionId=\"{FN_STRING_EQUAL}\">");
            let _ = writeln!(out, "{pad}  <Apply FunctionId=\"{FN_ONE_AND_ONLY}\">");
            let _ = writeln!(
                out,
                "{pad}    <{designator} AttributeId=\"{}\" DataType=\"{}\"/>",
                attr_escaped(&v.attribute_id),
                attr_escaped(&v.data_type)
            );
            let _ = writeln!(out, "{pad}  </Apply>");
            let _ = writeln!(
                out,
                "{pad}  <AttributeValue DataType=\"{}\">{}</AttributeValue>",
                attr_escaped(&v.data_type),
                attr_escaped(&v.value)
            );
            let _ = writeln!(out, "{pad}</Apply>");
        }
    }
}

fn escape_xml(text: &str, out: &mut String) {
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
}

/// Emit a request tuple as an XACML 2.0 context request. The four section
/// elements are always present, one `Attribute` per value, in the tuple's
/// canonical order, so emission is deterministic and
/// `parse_request(emit_request(r)) == r`.
pub fn emit_request(req: &RequestTuple) -> String {
    let mut out = String::with_capacity(512);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<Request xmlns=\"{CONTEXT_NS}\">");
    for (category, section) in [
        (Category::Subject, "Subject"),
        (Category::Resource, "Resource"),
        (Category::Action, "Action"),
        (Category::Environment, "Environment"),
    ] {
        let values = req.dimension(category);
        if values.is_empty() {
            let _ = writeln!(out, "  <{section}/>");
            continue;
        }
        let _ = writeln!(out, "  <{section}>");
        for v in values {
            out.push_str("    <Attribute AttributeId=\"");
            escape_xml(&v.attribute_id, &mut out);
            out.push_str("\" DataType=\"");
            escape_xml(&v.data_type, &mut out);
            out.push_str("\">\n      <AttributeValue>");
            escape_xml(&v.value, &mut out);
            out.push_str("</AttributeValue>\n    </Attribute>\n");
        }
        let _ = writeln!(out, "  </{section}>");
    }
    out.push_str("</Request>\n");
    out
}

/// Emit an XACML 2.0 context response carrying one decision.
pub fn emit_response(decision: Decision) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <Response xmlns=\"{CONTEXT_NS}\">\n\
         \x20 <Result>\n\
         \x20   <Decision>{decision}</Decision>\n\
         \x20 </Result>\n\
         </Response>\n"
    )
}
