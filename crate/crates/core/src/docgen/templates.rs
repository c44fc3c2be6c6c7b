use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::identity::PairSet;
use crate::lexicon::{ID_HEADER, NAME_HEADER};
use crate::seed;

/// Context templates a document can be dressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    InsuranceForm,
    TravelRecord,
    RegistrationSheet,
}

impl TemplateId {
    pub const ALL: [TemplateId; 3] = [
        TemplateId::InsuranceForm,
        TemplateId::TravelRecord,
        TemplateId::RegistrationSheet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::InsuranceForm => "insurance_form",
            TemplateId::TravelRecord => "travel_record",
            TemplateId::RegistrationSheet => "registration_sheet",
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Format-independent page content. Every renderer lays this out; the
/// transcript format serializes it directly as the "scanned page".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageLayout {
    pub doc_id: String,
    pub title: String,
    pub context: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: String,
    pub name_col: usize,
    pub id_col: usize,
}

impl PageLayout {
    pub fn context_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.context.iter().map(|(k, v)| format!("{k}：{v}"))
    }

    pub fn context_map(&self) -> BTreeMap<String, String> {
        self.context.iter().cloned().collect()
    }

    pub fn has_table(&self) -> bool {
        self.header.len() >= 2 && !self.rows.is_empty()
    }
}

const COMPANIES: &[&str] = &[
    "华泰建设有限公司",
    "宏远物流有限公司",
    "新世纪科技股份有限公司",
    "东海食品有限公司",
    "恒信贸易有限公司",
    "长风机械制造有限公司",
];
const DESTINATIONS: &[&str] = &[
    "杭州", "西安", "厦门", "昆明", "青岛", "南京", "上海", "北京", "广州", "重庆",
];
const AGENCIES: &[&str] = &["国旅假日旅行社", "春秋国际旅行社", "环球商务旅行社"];
const COMMUNITIES: &[&str] = &["东湖社区", "幸福里社区", "阳光花园社区", "滨江新村社区"];
const OFFICES: &[&str] = &["城关街道办事处", "新华街道办事处", "江南街道办事处"];
const AIRLINES: &[&str] = &["CA", "MU", "CZ", "HU", "ZH"];

fn date<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}-{:02}-{:02}",
        rng.gen_range(2022..=2025),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28)
    )
}

/// Lays out `truth` under `template`. Context values are drawn from `seed`.
pub fn layout(truth: &PairSet, template: TemplateId, seed: u64) -> PageLayout {
    let mut rng = seed::rng(seed, template.as_str(), truth.len() as u64);
    let n = truth.len();
    let (title, context, header, name_col, id_col, rows, footer);
    match template {
        TemplateId::InsuranceForm => {
            title = "团体意外伤害保险投保清单".to_owned();
            context = vec![
                (
                    "投保单位".to_owned(),
                    COMPANIES.choose(&mut rng).unwrap().to_string(),
                ),
                (
                    "保单编号".to_owned(),
                    format!(
                        "PA{}{:06}",
                        rng.gen_range(2022..=2025),
                        rng.gen_range(0..1_000_000)
                    ),
                ),
                ("生效日期".to_owned(), date(&mut rng)),
            ];
            header = vec!["序号", NAME_HEADER, ID_HEADER, "保险金额"];
            (name_col, id_col) = (1, 2);
            let amounts = ["100000", "200000", "300000", "500000"];
            rows = truth
                .pairs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    vec![
                        (i + 1).to_string(),
                        p.name.clone(),
                        p.id_number.clone(),
                        amounts.choose(&mut rng).unwrap().to_string(),
                    ]
                })
                .collect::<Vec<_>>();
            footer = "以上被保险人信息经投保单位确认无误。".to_owned();
        }
        TemplateId::TravelRecord => {
            title = "团队出行旅客登记表".to_owned();
            context = vec![
                (
                    "组团单位".to_owned(),
                    AGENCIES.choose(&mut rng).unwrap().to_string(),
                ),
                ("出发日期".to_owned(), date(&mut rng)),
                (
                    "目的地".to_owned(),
                    DESTINATIONS.choose(&mut rng).unwrap().to_string(),
                ),
                ("团队人数".to_owned(), n.to_string()),
            ];
            header = vec![NAME_HEADER, ID_HEADER, "航班号", "座位号"];
            (name_col, id_col) = (0, 1);
            let flight = format!(
                "{}{}",
                AIRLINES.choose(&mut rng).unwrap(),
                rng.gen_range(1000..9999)
            );
            rows = truth
                .pairs
                .iter()
                .map(|p| {
                    let seat = format!(
                        "{}{}",
                        rng.gen_range(10..40),
                        ['A', 'B', 'C', 'D', 'E', 'F'][rng.gen_range(0..6)]
                    );
                    vec![p.name.clone(), p.id_number.clone(), flight.clone(), seat]
                })
                .collect();
            footer = "请全体旅客携带有效身份证件按时登机。".to_owned();
        }
        TemplateId::RegistrationSheet => {
            title = "社区居民信息登记表".to_owned();
            context = vec![
                (
                    "登记地点".to_owned(),
                    COMMUNITIES.choose(&mut rng).unwrap().to_string(),
                ),
                (
                    "经办单位".to_owned(),
                    OFFICES.choose(&mut rng).unwrap().to_string(),
                ),
                ("登记日期".to_owned(), date(&mut rng)),
            ];
            header = vec!["序号", NAME_HEADER, ID_HEADER, "联系电话"];
            (name_col, id_col) = (1, 2);
            rows = truth
                .pairs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let phone = format!(
                        "1{}{:09}",
                        [3, 5, 7, 8, 9][rng.gen_range(0..5)],
                        rng.gen_range(0..1_000_000_000u64)
                    );
                    vec![
                        (i + 1).to_string(),
                        p.name.clone(),
                        p.id_number.clone(),
                        phone,
                    ]
                })
                .collect();
            footer = "本表信息仅用于社区服务管理。".to_owned();
        }
    }
    PageLayout {
        doc_id: truth.source_doc.clone(),
        title,
        context,
        header: header.into_iter().map(str::to_owned).collect(),
        rows,
        footer,
        name_col,
        id_col,
    }
}
