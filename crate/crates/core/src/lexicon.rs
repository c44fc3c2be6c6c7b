//! Embedded word lists: surnames, given-name characters, county codes, table
//! header labels and OCR confusable glyphs.
//!
//! Everything here is fixed data so that corpus generation, the reference
//! model and the OCR simulator stay reproducible across machines.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Canonical header label for the name column.
pub const NAME_HEADER: &str = "姓名";
/// Canonical header label for the ID column.
pub const ID_HEADER: &str = "身份证号";

/// Header labels recognized as the name column.
pub const NAME_LABELS: &[&str] = &["姓名", "名字", "姓 名", "被保险人姓名", "旅客姓名", "name"];
/// Header labels recognized as the ID column.
pub const ID_LABELS: &[&str] = &[
    "身份证号",
    "身份证号码",
    "证件号码",
    "公民身份号码",
    "id",
    "id_number",
];

pub const COMPOUND_SURNAMES: &[&str] = &[
    "欧阳", "司马", "诸葛", "上官", "东方", "皇甫", "慕容", "令狐", "夏侯", "尉迟",
];

const SINGLE_SURNAMES: &str = "王李张刘陈杨黄赵吴周徐孙马朱胡郭何高林罗郑梁谢宋唐许韩冯邓曹彭曾肖田董袁潘于蒋蔡余杜叶程苏魏吕丁任沈姚卢姜崔钟谭陆汪范金石廖贾夏韦付方白邹孟熊秦邱江尹薛闫段雷侯龙史陶黎贺顾毛郝龚邵万钱严覃武戴莫孔向汤常温康施牛樊葛邢安齐易乔伍庞颜倪庄聂章鲁岳翟殷詹申耿关兰焦俞左柳甘祝包宁尚符舒阮柯纪梅童凌毕单季裴霍涂苗谷盛曲翁冉骆蓝路游辛靳管柴蒙鲍华喻祁蒲房滕屈饶解牟艾尤阳穆农司卓古吉缪简车项连芦麦褚娄窦戚岑景党宫费卜冷晏席卫米柏宗瞿桂全佟应臧闵苟邬边卞姬师仇栾隋商刁沙荣巫寇桑郎甄丛仲虞敖巩佘池查麻苑迟邝";

const GIVEN_CHARS: &str = "伟芳娜秀英敏静丽强磊军洋勇艳杰娟涛明超霞平刚桂兰玉萍辉燕鹏华飞红建国文斌宇浩凯健俊帆帅旭宁龙林欣晨瑞博雪琳晶婷倩颖慧佳嘉怡思梦雨月鑫阳波宏峰亮成志新海春梅丹云莉蕾兵斐婉琪璐瑶然子涵轩睿泽昊晗铭诚锐哲逸航天皓翔鸿毅坤楠彬晖晓蓉菲莹露薇雯媛妍菁茜蕊萱蓓岚珊瑾璇琦玲珍凤翠荣兴贵福禄寿喜财发德仁义礼智信忠孝廉勤俭安康乐和泰顺祥吉庆永长久远振家邦中立正光耀煌伦之若如依可心语诗书画琴棋梓桐柏松竹菊荷芸蔚蓝青碧紫彤朱金银铜铁钢锋锦绣纯素洁清澈源泉江河湖澜潇湘渊溪沁润泓淼滨洲岛山岩峻崇嵩岳石坚固实真善美雅娴淑贤惠柔娇媚妙姝姗娅婕婧嫣宸宵宜宛宝容寒尘峥巍川州庭延弘彦征徽恒恺悦惟意承捷政敬斯昂昆昌昕星昭晋晟景曦朗望朝杉枫栋树根桦楷欢武淳添渝溢滔澄灿炜烨煜照熙爽牧玮珂珏琛瑜璋甫男畅白盛瞻知硕祺禹秋稳竣端笑策箐精纬维羽翊耕聪育胜舟良艺苇茂茗荃莎菡蒙蓬虹衡裕誉谦豪贝赫跃轶辰达迪通逍道邈闻阔雁雄韬韵颂颢风飘馨驰骏鹤鹰麟";

/// Six-digit county-level administrative division codes.
pub const REGION_CODES: &[&str] = &[
    "110101", "110102", "110105", "110106", "110108", "120101", "120103", "130102", "130104",
    "140105", "150102", "210102", "210202", "220102", "230102", "310101", "310104", "310106",
    "310115", "320102", "320106", "320505", "330102", "330106", "330212", "340102", "350102",
    "350203", "360102", "370102", "370202", "410102", "420102", "420106", "430102", "440103",
    "440106", "440304", "450102", "460105", "500103", "500106", "510104", "510107", "520102",
    "530102", "540102", "610103", "610113", "620102", "630102", "640104", "650102",
];

/// Visually confusable CJK glyph pairs. Each pair is applied in both
/// directions. Header label characters are deliberately absent.
const CJK_CONFUSABLE_PAIRS: &[(char, char)] = &[
    ('王', '玉'),
    ('己', '已'),
    ('日', '曰'),
    ('未', '末'),
    ('天', '夭'),
    ('大', '太'),
    ('刘', '划'),
    ('杨', '扬'),
    ('陈', '阵'),
    ('林', '材'),
    ('明', '朋'),
    ('晴', '睛'),
    ('清', '请'),
    ('伟', '伪'),
    ('芳', '方'),
    ('辉', '挥'),
    ('峰', '锋'),
    ('洋', '样'),
    ('静', '净'),
    ('丽', '俪'),
    ('军', '车'),
    ('建', '健'),
    ('娟', '涓'),
    ('鹏', '朋'),
    ('斌', '赋'),
    ('杰', '木'),
];

const DIGIT_CONFUSABLES: &[(char, &[char])] = &[
    ('0', &['8']),
    ('8', &['0', '3']),
    ('1', &['7']),
    ('7', &['1']),
    ('5', &['6']),
    ('6', &['5']),
    ('3', &['8']),
];

pub fn single_surnames() -> &'static [char] {
    static CELL: OnceLock<Vec<char>> = OnceLock::new();
    CELL.get_or_init(|| dedup_chars(SINGLE_SURNAMES))
}

pub fn given_chars() -> &'static [char] {
    static CELL: OnceLock<Vec<char>> = OnceLock::new();
    CELL.get_or_init(|| dedup_chars(GIVEN_CHARS))
}

fn dedup_chars(s: &str) -> Vec<char> {
    let mut seen = std::collections::HashSet::new();
    s.chars().filter(|c| seen.insert(*c)).collect()
}

/// Confusable substitutes for `c`, empty when the glyph is considered stable.
pub fn confusables(c: char) -> &'static [char] {
    static CJK: OnceLock<HashMap<char, Vec<char>>> = OnceLock::new();
    if let Some((_, subs)) = DIGIT_CONFUSABLES.iter().find(|(d, _)| *d == c) {
        return subs;
    }
    let map = CJK.get_or_init(|| {
        let mut m: HashMap<char, Vec<char>> = HashMap::new();
        for &(a, b) in CJK_CONFUSABLE_PAIRS {
            m.entry(a).or_default().push(b);
            m.entry(b).or_default().push(a);
        }
        m
    });
    map.get(&c).map(Vec::as_slice).unwrap_or(&[])
}

/// CJK ideographs plus CJK punctuation and full-width forms.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0xFF00..=0xFFEF
        | 0x20000..=0x2A6DF)
}

/// CJK ideographs only (no punctuation).
pub fn is_ideograph(c: char) -> bool {
    matches!(c as u32, 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2A6DF)
}

pub fn is_name_label(s: &str) -> bool {
    let s = s.trim();
    NAME_LABELS.iter().any(|l| l.eq_ignore_ascii_case(s))
}

pub fn is_id_label(s: &str) -> bool {
    let s = s.trim();
    ID_LABELS.iter().any(|l| l.eq_ignore_ascii_case(s))
}

/// Whether an ideograph run reads as a personal name: two to four characters
/// starting with a known surname, and not a header label.
pub fn looks_like_name(token: &str) -> bool {
    let n = token.chars().count();
    if !(2..=4).contains(&n) || !token.chars().all(is_ideograph) {
        return false;
    }
    if is_name_label(token) || is_id_label(token) {
        return false;
    }
    if COMPOUND_SURNAMES.iter().any(|s| token.starts_with(s)) {
        return n >= 3;
    }
    let first = token.chars().next().unwrap_or_default();
    n <= 3 && single_surnames().contains(&first)
}

/// Maximal runs of ideographs with their starting char offsets.
pub fn ideograph_runs(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, c) in text.chars().enumerate() {
        if is_ideograph(c) {
            if cur.is_empty() {
                start = i;
            }
            cur.push(c);
        } else if !cur.is_empty() {
            out.push((start, std::mem::take(&mut cur)));
        }
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    out
}

/// Display width in monospace cells: wide for CJK, narrow otherwise.
pub fn display_width(s: &str) -> usize {
    s.chars().map(|c| if is_cjk(c) { 2 } else { 1 }).sum()
}
