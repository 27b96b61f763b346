//! Dish / ingredient / image store and the text DSL that populates it.
//!
//! DSL lines (trimmed, blank lines ignored):
//!
//! ```text
//! #bread with tomato     dish; runs until the next '#'
//! -bread                 ingredient
//! =toasted bread         substitute for the ingredient just above
//! -olive oil
//! $oil                   image name for the dish or ingredient just above
//! -+garlic               optional ingredient
//! ```
//!
//! Without a `$` line the image name is the dish or ingredient name.
//!
//! The store holds the six relations ingredients, dishes, images,
//! dish-ingredient, dish-image and ingredient-image, plus the diet-condition
//! and profile-flag relations. A flag row with no condition is one the user
//! added by hand.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Id = u32;

/// One ingredient line of a dish with its substitutes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngredientDecl {
    pub name: String,
    pub optional: bool,
    pub substitutes: Vec<String>,
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DishRecord {
    pub name: String,
    pub image: String,
    pub ingredients: Vec<IngredientDecl>,
}

fn normalize_name(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Dish,
    DishImage,
    Ingredient,
    IngredientImage,
    Substitute,
}

pub fn parse_dsl(text: &str) -> Result<Vec<DishRecord>> {
    let mut dishes: Vec<DishRecord> = Vec::new();
    let mut previous: Option<LineKind> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = if let Some(rest) = line.strip_prefix('#') {
            (LineKind::Dish, rest)
        } else if let Some(rest) = line.strip_prefix("-+") {
            (LineKind::Ingredient, rest)
        } else if let Some(rest) = line.strip_prefix('-') {
            (LineKind::Ingredient, rest)
        } else if let Some(rest) = line.strip_prefix('=') {
            (LineKind::Substitute, rest)
        } else if let Some(rest) = line.strip_prefix('$') {
            let kind = match previous {
                Some(LineKind::Dish) => LineKind::DishImage,
                Some(LineKind::Ingredient) => LineKind::IngredientImage,
                _ => return Err(Error::dsl(lineno, "'$' can only follow a '#' or a '-' line")),
            };
            (kind, rest)
        } else {
            return Err(Error::dsl(lineno, format!("unrecognized line '{line}'")));
        };
        let name = normalize_name(rest);
        if name.is_empty() {
            return Err(Error::dsl(lineno, "empty name"));
        }

        if kind == LineKind::Dish {
            if dishes.iter().any(|d| d.name == name) {
                return Err(Error::dsl(lineno, format!("dish '{name}' declared twice")));
            }
            dishes.push(DishRecord { name: name.clone(), image: name, ingredients: Vec::new() });
            previous = Some(kind);
            continue;
        }
        let Some(dish) = dishes.last_mut() else {
            return Err(Error::dsl(lineno, "line outside of a dish; expected a '#' line first"));
        };
        match kind {
            LineKind::DishImage => dish.image = name,
            LineKind::Ingredient => {
                let used = dish.ingredients.iter().any(|i| i.name == name || i.substitutes.contains(&name));
                if used {
                    return Err(Error::dsl(lineno, format!("ingredient '{name}' listed twice in one dish")));
                }
                let optional = line.starts_with("-+");
                dish.ingredients.push(IngredientDecl { name: name.clone(), optional, substitutes: Vec::new(), image: name });
            }
            LineKind::IngredientImage => {
                dish.ingredients.last_mut().expect("'$' follows an ingredient").image = name;
            }
            LineKind::Substitute => {
                if !matches!(previous, Some(LineKind::Ingredient | LineKind::Substitute)) {
                    return Err(Error::dsl(lineno, "'=' must follow a '-' line"));
                }
                let ingredient = dish.ingredients.last_mut().expect("'=' follows an ingredient");
                if ingredient.name == name || ingredient.substitutes.contains(&name) {
                    return Err(Error::dsl(lineno, format!("substitute '{name}' repeats an ingredient")));
                }
                ingredient.substitutes.push(name);
            }
            LineKind::Dish => unreachable!(),
        }
        previous = Some(kind);
    }
    Ok(dishes)
}

/// Writes records back as DSL; `$` lines appear only for non-default images.
pub fn serialize_dsl(records: &[DishRecord]) -> String {
    let mut out = String::new();
    for dish in records {
        out.push_str(&format!("#{}\n", dish.name));
        if dish.image != dish.name {
            out.push_str(&format!("${}\n", dish.image));
        }
        for ingredient in &dish.ingredients {
            let marker = if ingredient.optional { "-+" } else { "-" };
            out.push_str(&format!("{marker}{}\n", ingredient.name));
            if ingredient.image != ingredient.name {
                out.push_str(&format!("${}\n", ingredient.image));
            }
            for substitute in &ingredient.substitutes {
                out.push_str(&format!("={substitute}\n"));
            }
        }
    }
    out
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRow {
    pub id: Id,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRow {
    pub id: Id,
    pub name: String,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DishIngredientRow {
    pub dish_id: Id,
    pub ingredient_id: Id,
    /// Order of appearance within the dish.
    pub position: u32,
    pub optional: bool,
    /// Set when this row is a substitute for another ingredient of the dish.
    pub substitute_for: Option<Id>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkRow {
    pub owner_id: Id,
    pub image_id: Id,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConditionIngredientRow {
    pub condition_id: Id,
    pub ingredient_id: Id,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileFlagRow {
    pub profile_id: Id,
    /// `None` for ingredients the user flagged directly.
    pub condition_id: Option<Id>,
    pub ingredient_id: Id,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileConditionRow {
    pub profile_id: Id,
    pub condition_id: Id,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Store {
    pub ingredients: Vec<NamedRow>,
    pub dishes: Vec<NamedRow>,
    pub images: Vec<ImageRow>,
    pub dish_ingredients: Vec<DishIngredientRow>,
    pub dish_images: Vec<LinkRow>,
    pub ingredient_images: Vec<LinkRow>,
    pub conditions: Vec<NamedRow>,
    pub condition_ingredients: Vec<ConditionIngredientRow>,
    pub profiles: Vec<Id>,
    pub profile_conditions: Vec<ProfileConditionRow>,
    pub profile_flags: Vec<ProfileFlagRow>,
}

fn next_id<'a>(ids: impl Iterator<Item = &'a Id>) -> Id {
    ids.max().map_or(1, |m| m + 1)
}

fn upsert(rows: &mut Vec<NamedRow>, name: &str) -> Id {
    if let Some(row) = rows.iter().find(|r| r.name == name) {
        return row.id;
    }
    let id = next_id(rows.iter().map(|r| &r.id));
    rows.push(NamedRow { id, name: name.to_string() });
    id
}

fn find(rows: &[NamedRow], name: &str) -> Option<Id> {
    let name = normalize_name(name);
    rows.iter().find(|r| r.name == name).map(|r| r.id)
}

fn name_of(rows: &[NamedRow], id: Id) -> &str {
    rows.iter().find(|r| r.id == id).map(|r| r.name.as_str()).unwrap_or("")
}

/// Where image payloads come from during import.
#[derive(Clone, Debug, Default)]
pub struct ImageSource {
    pub dir: Option<PathBuf>,
}

impl ImageSource {
    /// Looks for `<dir>/<name>.{png,jpg,jpeg,gif}`; missing files load as an
    /// empty payload.
    fn load(&self, name: &str) -> Result<Vec<u8>> {
        let Some(dir) = &self.dir else { return Ok(Vec::new()) };
        for ext in ["png", "jpg", "jpeg", "gif"] {
            let path = dir.join(format!("{name}.{ext}"));
            if path.is_file() {
                return Ok(fs::read(path)?);
            }
        }
        Ok(Vec::new())
    }
}

impl Store {
    pub fn relation_sizes(&self) -> [usize; 6] {
        [
            self.ingredients.len(),
            self.dishes.len(),
            self.images.len(),
            self.dish_ingredients.len(),
            self.dish_images.len(),
            self.ingredient_images.len(),
        ]
    }

    fn image(&mut self, name: &str, source: &ImageSource) -> Result<Id> {
        if let Some(row) = self.images.iter().find(|r| r.name == name) {
            return Ok(row.id);
        }
        let id = next_id(self.images.iter().map(|r| &r.id));
        let bytes = source.load(name)?;
        self.images.push(ImageRow { id, name: name.to_string(), bytes });
        Ok(id)
    }

    fn link(rows: &mut Vec<LinkRow>, owner_id: Id, image_id: Id) {
        let row = LinkRow { owner_id, image_id };
        if !rows.contains(&row) {
            rows.push(row);
        }
    }

    pub fn image_bytes(&self, id: Id) -> Option<(&str, &[u8])> {
        self.images.iter().find(|r| r.id == id).map(|r| (r.name.as_str(), r.bytes.as_slice()))
    }

    /// Every id referenced by a relation row exists.
    pub fn validate(&self) -> Result<()> {
        let has = |rows: &[NamedRow], id: Id| rows.iter().any(|r| r.id == id);
        let has_image = |id: Id| self.images.iter().any(|r| r.id == id);
        for row in &self.dish_ingredients {
            if !has(&self.dishes, row.dish_id) || !has(&self.ingredients, row.ingredient_id) {
                return Err(Error::Store("dish-ingredient row references a missing record".into()));
            }
            if let Some(original) = row.substitute_for {
                let present = self
                    .dish_ingredients
                    .iter()
                    .any(|r| r.dish_id == row.dish_id && r.ingredient_id == original);
                if !present {
                    return Err(Error::Store("substitute refers to an ingredient not in the dish".into()));
                }
            }
        }
        for row in &self.dish_images {
            if !has(&self.dishes, row.owner_id) || !has_image(row.image_id) {
                return Err(Error::Store("dish-image row references a missing record".into()));
            }
        }
        for row in &self.ingredient_images {
            if !has(&self.ingredients, row.owner_id) || !has_image(row.image_id) {
                return Err(Error::Store("ingredient-image row references a missing record".into()));
            }
        }
        for row in &self.condition_ingredients {
            if !has(&self.conditions, row.condition_id) || !has(&self.ingredients, row.ingredient_id) {
                return Err(Error::Store("condition row references a missing record".into()));
            }
        }
        for row in &self.profile_flags {
            let condition_ok = row.condition_id.is_none_or(|c| has(&self.conditions, c));
            if !self.profiles.contains(&row.profile_id) || !condition_ok || !has(&self.ingredients, row.ingredient_id) {
                return Err(Error::Store("profile flag references a missing record".into()));
            }
        }
        Ok(())
    }

    fn normalize_order(&mut self) {
        self.dish_ingredients.sort_by_key(|r| (r.dish_id, r.position));
        self.dish_images.sort();
        self.ingredient_images.sort();
        self.condition_ingredients.sort();
        self.profile_conditions.sort();
        self.profile_flags.sort();
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: Store = serde_json::from_str(text)?;
        store.validate()?;
        Ok(store)
    }
}

/// Upserts parsed records by name. A dish that is imported again has its
/// ingredient rows replaced, so importing the same text twice is a no-op.
pub fn populate_store(store: &mut Store, records: &[DishRecord], images: &ImageSource) -> Result<()> {
    for dish in records {
        let dish_id = upsert(&mut store.dishes, &dish.name);
        store.dish_ingredients.retain(|r| r.dish_id != dish_id);
        store.dish_images.retain(|r| r.owner_id != dish_id);
        let image_id = store.image(&dish.image, images)?;
        Store::link(&mut store.dish_images, dish_id, image_id);

        let mut position = 0;
        for decl in &dish.ingredients {
            let ingredient_id = upsert(&mut store.ingredients, &decl.name);
            let image_id = store.image(&decl.image, images)?;
            Store::link(&mut store.ingredient_images, ingredient_id, image_id);
            store.dish_ingredients.push(DishIngredientRow {
                dish_id,
                ingredient_id,
                position,
                optional: decl.optional,
                substitute_for: None,
            });
            position += 1;
            for substitute in &decl.substitutes {
                let sub_id = upsert(&mut store.ingredients, substitute);
                let image_id = store.image(substitute, images)?;
                Store::link(&mut store.ingredient_images, sub_id, image_id);
                store.dish_ingredients.push(DishIngredientRow {
                    dish_id,
                    ingredient_id: sub_id,
                    position,
                    optional: decl.optional,
                    substitute_for: Some(ingredient_id),
                });
                position += 1;
            }
        }
    }
    store.normalize_order();
    store.validate()
}

/// Storage behind the menu database.
pub trait StoreBackend {
    fn load(&self) -> Result<Store>;
    fn save(&self, store: &Store) -> Result<()>;
}

/// Single JSON file; a missing file reads as an empty store.
#[derive(Clone, Debug)]
pub struct JsonFileBackend {
    pub path: PathBuf,
}

impl JsonFileBackend {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        JsonFileBackend { path: path.into() }
    }
}

impl StoreBackend for JsonFileBackend {
    fn load(&self) -> Result<Store> {
        if !self.path.exists() {
            return Ok(Store::default());
        }
        Store::from_json(&fs::read_to_string(&self.path)?)
    }

    fn save(&self, store: &Store) -> Result<()> {
        store.validate()?;
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, store.to_json()?)?;
        fs::rename(tmp, &self.path)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageInfo {
    pub id: Id,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IngredientUse {
    pub ingredient_id: Id,
    pub name: String,
    pub optional: bool,
    /// Substitutes listed under this ingredient.
    pub substitutes: Vec<String>,
    /// The ingredient this one can replace, if it is a substitute.
    pub substitute_for: Option<String>,
    pub images: Vec<ImageInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DishView {
    pub id: Id,
    pub name: String,
    pub images: Vec<ImageInfo>,
    pub ingredients: Vec<IngredientUse>,
}

impl DishView {
    pub fn required(&self) -> impl Iterator<Item = &IngredientUse> {
        self.ingredients.iter().filter(|i| !i.optional)
    }

    pub fn optional(&self) -> impl Iterator<Item = &IngredientUse> {
        self.ingredients.iter().filter(|i| i.optional)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IngredientView {
    pub id: Id,
    pub name: String,
    pub images: Vec<ImageInfo>,
    /// Dishes using it, sorted by name.
    pub dishes: Vec<String>,
}

fn images_for(store: &Store, links: &[LinkRow], owner: Id) -> Vec<ImageInfo> {
    links
        .iter()
        .filter(|l| l.owner_id == owner)
        .filter_map(|l| store.images.iter().find(|i| i.id == l.image_id))
        .map(|i| ImageInfo { id: i.id, name: i.name.clone() })
        .collect()
}

pub fn lookup_dish(store: &Store, name: &str) -> Result<DishView> {
    let id = find(&store.dishes, name).ok_or_else(|| Error::NotFound(format!("dish '{name}'")))?;
    let rows: Vec<&DishIngredientRow> = store.dish_ingredients.iter().filter(|r| r.dish_id == id).collect();
    let ingredients = rows
        .iter()
        .map(|row| IngredientUse {
            ingredient_id: row.ingredient_id,
            name: name_of(&store.ingredients, row.ingredient_id).to_string(),
            optional: row.optional,
            substitutes: rows
                .iter()
                .filter(|r| r.substitute_for == Some(row.ingredient_id))
                .map(|r| name_of(&store.ingredients, r.ingredient_id).to_string())
                .collect(),
            substitute_for: row.substitute_for.map(|o| name_of(&store.ingredients, o).to_string()),
            images: images_for(store, &store.ingredient_images, row.ingredient_id),
        })
        .collect();
    Ok(DishView {
        id,
        name: name_of(&store.dishes, id).to_string(),
        images: images_for(store, &store.dish_images, id),
        ingredients,
    })
}

pub fn lookup_ingredient(store: &Store, name: &str) -> Result<IngredientView> {
    let id = find(&store.ingredients, name).ok_or_else(|| Error::NotFound(format!("ingredient '{name}'")))?;
    let dishes: BTreeSet<String> = store
        .dish_ingredients
        .iter()
        .filter(|r| r.ingredient_id == id)
        .map(|r| name_of(&store.dishes, r.dish_id).to_string())
        .collect();
    Ok(IngredientView {
        id,
        name: name_of(&store.ingredients, id).to_string(),
        images: images_for(store, &store.ingredient_images, id),
        dishes: dishes.into_iter().collect(),
    })
}

/// A diet condition and the ingredients it rules out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub name: String,
    pub ingredients: Vec<String>,
}

/// Upserts conditions; every listed ingredient must already exist.
pub fn add_conditions(store: &mut Store, specs: &[ConditionSpec]) -> Result<()> {
    for spec in specs {
        let ingredient_ids = spec
            .ingredients
            .iter()
            .map(|i| find(&store.ingredients, i).ok_or_else(|| Error::NotFound(format!("ingredient '{i}'"))))
            .collect::<Result<Vec<_>>>()?;
        let condition_id = upsert(&mut store.conditions, &normalize_name(&spec.name));
        store.condition_ingredients.retain(|r| r.condition_id != condition_id);
        for ingredient_id in ingredient_ids {
            let row = ConditionIngredientRow { condition_id, ingredient_id };
            if !store.condition_ingredients.contains(&row) {
                store.condition_ingredients.push(row);
            }
        }
    }
    store.normalize_order();
    store.validate()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DietProfile {
    pub id: Id,
    pub conditions: Vec<String>,
    pub flagged: BTreeSet<Id>,
}

/// Creates a profile. Condition-derived flags carry their condition id;
/// user-chosen ingredients get a flag row with no condition.
pub fn set_profile(store: &mut Store, conditions: &[&str], user_ingredients: &[&str]) -> Result<DietProfile> {
    let condition_ids = conditions
        .iter()
        .map(|c| find(&store.conditions, c).ok_or_else(|| Error::NotFound(format!("condition '{c}'"))))
        .collect::<Result<Vec<_>>>()?;
    let user_ids = user_ingredients
        .iter()
        .map(|i| find(&store.ingredients, i).ok_or_else(|| Error::NotFound(format!("ingredient '{i}'"))))
        .collect::<Result<Vec<_>>>()?;
    let profile_id = next_id(store.profiles.iter());
    store.profiles.push(profile_id);
    let mut flags = BTreeSet::new();
    for &condition_id in &condition_ids {
        store.profile_conditions.push(ProfileConditionRow { profile_id, condition_id });
        for row in store.condition_ingredients.iter().filter(|r| r.condition_id == condition_id) {
            flags.insert(ProfileFlagRow { profile_id, condition_id: Some(condition_id), ingredient_id: row.ingredient_id });
        }
    }
    for ingredient_id in user_ids {
        flags.insert(ProfileFlagRow { profile_id, condition_id: None, ingredient_id });
    }
    store.profile_flags.extend(flags);
    store.normalize_order();
    store.validate()?;
    get_profile(store, profile_id)
}

pub fn get_profile(store: &Store, id: Id) -> Result<DietProfile> {
    if !store.profiles.contains(&id) {
        return Err(Error::NotFound(format!("profile {id}")));
    }
    let conditions = store
        .profile_conditions
        .iter()
        .filter(|r| r.profile_id == id)
        .map(|r| name_of(&store.conditions, r.condition_id).to_string())
        .collect();
    let flagged = store.profile_flags.iter().filter(|r| r.profile_id == id).map(|r| r.ingredient_id).collect();
    Ok(DietProfile { id, conditions, flagged })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlaggedIngredient {
    pub ingredient_id: Id,
    pub name: String,
    pub optional: bool,
    pub substitute_for: Option<String>,
    /// Conditions behind the flag; `None` marks a user-added flag.
    pub reasons: Vec<Option<String>>,
}

/// Dish ingredients (substitutes included) that the profile flags, by name.
pub fn flag_dish(store: &Store, dish: &str, profile: &DietProfile) -> Result<Vec<FlaggedIngredient>> {
    let view = lookup_dish(store, dish)?;
    let mut out: Vec<FlaggedIngredient> = view
        .ingredients
        .iter()
        .filter(|use_| profile.flagged.contains(&use_.ingredient_id))
        .map(|use_| FlaggedIngredient {
            ingredient_id: use_.ingredient_id,
            name: use_.name.clone(),
            optional: use_.optional,
            substitute_for: use_.substitute_for.clone(),
            reasons: store
                .profile_flags
                .iter()
                .filter(|r| r.profile_id == profile.id && r.ingredient_id == use_.ingredient_id)
                .map(|r| r.condition_id.map(|c| name_of(&store.conditions, c).to_string()))
                .collect(),
        })
        .collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerText {
    pub source: String,
    pub target: String,
}

/// Bilingual question template; `{dish}` and `{ingredient}` are substituted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogTemplate {
    pub id: String,
    pub source: String,
    pub target: String,
    pub answers: Vec<AnswerText>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePair {
    /// Language of the diner.
    pub source: String,
    /// Language of the staff.
    pub target: String,
}

impl Default for LanguagePair {
    fn default() -> Self {
        LanguagePair { source: "en".into(), target: "es".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DialogQuestion {
    pub template_id: String,
    pub ingredient: String,
    pub question_source: String,
    pub question_target: String,
    pub answer_options: Vec<AnswerText>,
    pub language_pair: LanguagePair,
}

const DEFAULT_TEMPLATES: &str = include_str!("../data/dialog_templates.json");

/// The built-in English/Spanish removal and clarification templates.
pub fn default_templates() -> Vec<DialogTemplate> {
    serde_json::from_str(DEFAULT_TEMPLATES).expect("bundled dialog templates are valid")
}

pub fn load_templates(path: &Path) -> Result<Vec<DialogTemplate>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One question per template for every flagged ingredient, ingredients in
/// name order, templates in file order.
pub fn dialog_templates(
    dish: &str,
    flagged: &[FlaggedIngredient],
    languages: &LanguagePair,
    templates: &[DialogTemplate],
) -> Vec<DialogQuestion> {
    let mut ordered: Vec<&FlaggedIngredient> = flagged.iter().collect();
    ordered.sort_by(|a, b| a.name.cmp(&b.name));
    let fill = |text: &str, ingredient: &str| text.replace("{dish}", dish).replace("{ingredient}", ingredient);
    ordered
        .into_iter()
        .flat_map(|ingredient| {
            templates.iter().map(move |template| DialogQuestion {
                template_id: template.id.clone(),
                ingredient: ingredient.name.clone(),
                question_source: fill(&template.source, &ingredient.name),
                question_target: fill(&template.target, &ingredient.name),
                answer_options: template.answers.clone(),
                language_pair: languages.clone(),
            })
        })
        .collect()
}

/// Counts of each relation, keyed by relation name.
pub fn summary(store: &Store) -> BTreeMap<&'static str, usize> {
    let names = ["ingredients", "dishes", "images", "dish_ingredients", "dish_images", "ingredient_images"];
    let mut out: BTreeMap<&'static str, usize> = names.into_iter().zip(store.relation_sizes()).collect();
    out.insert("conditions", store.conditions.len());
    out.insert("profiles", store.profiles.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BREAD: &str = "#bread with tomato\n-bread\n=toasted bread\n-tomato\n-olive oil\n$oil\n-salt\n-+garlic\n";
    const SALAD: &str = "#tomato salad\n-tomato\n-lettuce\n-+onion\n";

    fn store_of(text: &str) -> Store {
        let mut store = Store::default();
        populate_store(&mut store, &parse_dsl(text).unwrap(), &ImageSource::default()).unwrap();
        store
    }

    #[test]
    fn parses_bread_block() {
        let dishes = parse_dsl(BREAD).unwrap();
        assert_eq!(dishes.len(), 1);
        let dish = &dishes[0];
        assert_eq!(dish.name, "bread with tomato");
        assert_eq!(dish.image, "bread with tomato");
        let names: Vec<&str> = dish.ingredients.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(names, ["bread", "tomato", "olive oil", "salt", "garlic"]);
        assert_eq!(dish.ingredients[0].substitutes, ["toasted bread"]);
        assert_eq!(dish.ingredients[2].image, "oil");
        assert!(dish.ingredients[4].optional);
        assert!(dish.ingredients[..4].iter().all(|i| !i.optional));
    }

    #[test]
    fn empty_dsl() {
        assert!(parse_dsl("").unwrap().is_empty());
        assert!(parse_dsl("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn dsl_errors_cite_lines() {
        let cases = [
            ("#soup\n=water\n", 2),
            ("=water\n", 1),
            ("#soup\n-water\n$pic\n$again\n", 4),
            ("#soup\n-water\n=salt\n$pic\n", 4),
            ("#\n", 1),
            ("-salt\n", 1),
            ("#soup\n*salt\n", 2),
            ("#soup\n-salt\n-salt\n", 3),
        ];
        for (text, line) in cases {
            match parse_dsl(text) {
                Err(Error::Dsl { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn dish_image_line() {
        let dishes = parse_dsl("#paella\n$paella valenciana\n-rice\n").unwrap();
        assert_eq!(dishes[0].image, "paella valenciana");
    }

    #[test]
    fn dsl_round_trip() {
        let text = format!("{BREAD}{SALAD}#paella\n$paella pan\n-rice\n=bomba rice\n=long rice\n");
        let parsed = parse_dsl(&text).unwrap();
        assert_eq!(parse_dsl(&serialize_dsl(&parsed)).unwrap(), parsed);
    }

    #[test]
    fn populates_six_relations() {
        let store = store_of(BREAD);
        assert_eq!(store.dishes.len(), 1);
        assert_eq!(store.ingredients.len(), 6);
        assert!(store.images.len() >= 2);
        assert!(store.images.iter().any(|i| i.name == "oil"));
        assert!(store.images.iter().any(|i| i.name == "bread with tomato"));
        assert_eq!(store.dish_ingredients.len(), 6);
        assert_eq!(store.dish_images.len(), 1);
        assert_eq!(store.ingredient_images.len(), 6);
        let substitute = store.dish_ingredients.iter().find(|r| r.substitute_for.is_some()).unwrap();
        assert_eq!(name_of(&store.ingredients, substitute.ingredient_id), "toasted bread");
    }

    #[test]
    fn empty_records_give_empty_store() {
        let store = store_of("");
        assert_eq!(store.relation_sizes(), [0; 6]);
    }

    #[test]
    fn reimport_is_idempotent() {
        let mut store = store_of(&format!("{BREAD}{SALAD}"));
        let before = store.clone();
        populate_store(&mut store, &parse_dsl(&format!("{BREAD}{SALAD}")).unwrap(), &ImageSource::default()).unwrap();
        assert_eq!(store, before);
        populate_store(&mut store, &parse_dsl(BREAD).unwrap(), &ImageSource::default()).unwrap();
        assert_eq!(store, before);
    }

    #[test]
    fn shared_ingredient_has_one_record() {
        let store = store_of(&format!("{BREAD}{SALAD}"));
        assert_eq!(store.ingredients.iter().filter(|i| i.name == "tomato").count(), 1);
        let tomato = find(&store.ingredients, "tomato").unwrap();
        assert_eq!(store.dish_ingredients.iter().filter(|r| r.ingredient_id == tomato).count(), 2);
        let view = lookup_ingredient(&store, "Tomato").unwrap();
        assert_eq!(view.dishes, ["bread with tomato", "tomato salad"]);
    }

    #[test]
    fn dish_lookup_resolves_everything() {
        let store = store_of(BREAD);
        let dish = lookup_dish(&store, "bread with tomato").unwrap();
        assert_eq!(dish.ingredients.len(), 6);
        let garlic = dish.ingredients.iter().find(|i| i.name == "garlic").unwrap();
        assert!(garlic.optional);
        assert_eq!(dish.optional().count(), 1);
        assert_eq!(dish.ingredients[0].substitutes, ["toasted bread"]);
        assert_eq!(dish.ingredients[1].substitute_for.as_deref(), Some("bread"));
        let oil = dish.ingredients.iter().find(|i| i.name == "olive oil").unwrap();
        assert_eq!(oil.images[0].name, "oil");
        assert_eq!(dish.images[0].name, "bread with tomato");
        assert!(matches!(lookup_dish(&store, "unknown"), Err(Error::NotFound(_))));
        assert!(matches!(lookup_ingredient(&store, "unknown"), Err(Error::NotFound(_))));
    }

    #[test]
    fn navigation_is_symmetric() {
        let store = store_of(&format!("{BREAD}{SALAD}"));
        for dish in &store.dishes {
            for ingredient in lookup_dish(&store, &dish.name).unwrap().ingredients {
                assert!(lookup_ingredient(&store, &ingredient.name).unwrap().dishes.contains(&dish.name));
            }
        }
        for ingredient in &store.ingredients {
            for dish in lookup_ingredient(&store, &ingredient.name).unwrap().dishes {
                assert!(lookup_dish(&store, &dish).unwrap().ingredients.iter().any(|i| i.name == ingredient.name));
            }
        }
    }

    fn flag_names(flags: &[FlaggedIngredient]) -> Vec<&str> {
        flags.iter().map(|f| f.name.as_str()).collect()
    }

    #[test]
    fn flags_user_added_ingredient() {
        let mut store = store_of(BREAD);
        let profile = set_profile(&mut store, &[], &["garlic"]).unwrap();
        let flags = flag_dish(&store, "bread with tomato", &profile).unwrap();
        assert_eq!(flag_names(&flags), ["garlic"]);
        assert!(flags[0].optional);
        assert_eq!(flags[0].reasons, [None]);
        let row = store.profile_flags.iter().find(|r| r.profile_id == profile.id).unwrap();
        assert_eq!(row.condition_id, None);
    }

    #[test]
    fn empty_profile_flags_nothing() {
        let mut store = store_of(BREAD);
        let profile = set_profile(&mut store, &[], &[]).unwrap();
        assert!(flag_dish(&store, "bread with tomato", &profile).unwrap().is_empty());
    }

    #[test]
    fn condition_flags_match_user_flags() {
        let mut store = store_of(&format!("{BREAD}{SALAD}"));
        add_conditions(
            &mut store,
            &[ConditionSpec { name: "gluten intolerance".into(), ingredients: vec!["bread".into(), "toasted bread".into()] }],
        )
        .unwrap();
        let by_condition = set_profile(&mut store, &["gluten intolerance"], &[]).unwrap();
        let by_hand = set_profile(&mut store, &[], &["bread", "toasted bread"]).unwrap();
        assert_ne!(by_condition.id, by_hand.id);
        let a = flag_dish(&store, "bread with tomato", &by_condition).unwrap();
        let b = flag_dish(&store, "bread with tomato", &by_hand).unwrap();
        assert_eq!(flag_names(&a), ["bread", "toasted bread"]);
        assert_eq!(flag_names(&a), flag_names(&b));
        assert_eq!(a[0].reasons, [Some("gluten intolerance".to_string())]);
        assert!(set_profile(&mut store, &["no such"], &[]).is_err());
        assert!(set_profile(&mut store, &[], &["no such"]).is_err());
        assert!(add_conditions(&mut store, &[ConditionSpec { name: "x".into(), ingredients: vec!["nope".into()] }]).is_err());
    }

    #[test]
    fn dialog_for_one_flag() {
        let mut store = store_of(BREAD);
        let profile = set_profile(&mut store, &[], &["garlic"]).unwrap();
        let flags = flag_dish(&store, "bread with tomato", &profile).unwrap();
        let questions = dialog_templates("bread with tomato", &flags, &LanguagePair::default(), &default_templates());
        assert_eq!(questions.len(), 2);
        assert_eq!(questions[0].template_id, "remove");
        assert_eq!(questions[1].template_id, "clarify");
        for q in &questions {
            assert_eq!(q.answer_options.len(), 3);
            assert!(q.question_source.contains("garlic"));
            assert!(q.question_target.contains("garlic"));
            assert_ne!(q.question_source, q.question_target);
        }
        assert!(dialog_templates("x", &[], &LanguagePair::default(), &default_templates()).is_empty());
    }

    #[test]
    fn dialog_orders_ingredients_by_name() {
        let mut store = store_of(BREAD);
        let profile = set_profile(&mut store, &[], &["salt", "garlic"]).unwrap();
        let flags = flag_dish(&store, "bread with tomato", &profile).unwrap();
        let questions = dialog_templates("bread with tomato", &flags, &LanguagePair::default(), &default_templates());
        let order: Vec<&str> = questions.iter().map(|q| q.ingredient.as_str()).collect();
        assert_eq!(order, ["garlic", "garlic", "salt", "salt"]);
    }

    #[test]
    fn json_backend_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let backend = JsonFileBackend::new(dir.path().join("menu.json"));
        assert_eq!(backend.load().unwrap(), Store::default());
        let mut store = store_of(BREAD);
        store.images[0].bytes = vec![0x89, 0x50, 0x4e, 0x47];
        backend.save(&store).unwrap();
        assert_eq!(backend.load().unwrap(), store);
    }

    #[test]
    fn image_payloads_load_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("oil.png"), b"PNGDATA").unwrap();
        let mut store = Store::default();
        let images = ImageSource { dir: Some(dir.path().to_path_buf()) };
        populate_store(&mut store, &parse_dsl(BREAD).unwrap(), &images).unwrap();
        let oil = store.images.iter().find(|i| i.name == "oil").unwrap();
        assert_eq!(oil.bytes, b"PNGDATA");
        assert!(store.images.iter().filter(|i| i.name != "oil").all(|i| i.bytes.is_empty()));
    }

    #[test]
    fn validate_catches_dangling_rows() {
        let mut store = store_of(BREAD);
        store.dish_images.push(LinkRow { owner_id: 99, image_id: 1 });
        assert!(matches!(store.validate(), Err(Error::Store(_))));
    }
}
