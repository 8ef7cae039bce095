use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::pareto::{fit_pareto_band, truncated_pareto_mean, GridSpec, ParetoParams, TruncatedLomax};
use super::SamplerError;
use crate::band::SizeBand;
use crate::codes::{Country, CountrySector, Sector};
use crate::ingest::csvio::{fmt_opt, SchemaReader};
use crate::ingest::{IngestError, SbsKey, SbsTable};
use crate::rng::{substream, Stage};

pub(crate) const FIRM_HEADER: [&str; 9] = [
    "id",
    "country",
    "sector",
    "band",
    "employees",
    "turnover",
    "k_out",
    "k_in",
    "is_row_dummy",
];

/// A synthetic firm or a rest-of-world dummy supplier.
///
/// Dummies carry only a sector and a single out-link target; their country is
/// the import origin, filled in after the network is wired.
#[derive(Clone, Debug, PartialEq)]
pub struct Firm {
    pub id: u32,
    pub country: Option<Country>,
    pub sector: Sector,
    pub band: Option<SizeBand>,
    pub employees: Option<u32>,
    /// Out-strength in EUR per year.
    pub turnover: Option<f64>,
    pub k_out_target: u32,
    pub k_in_target: u32,
    pub is_row_dummy: bool,
}

impl Firm {
    /// The IO-table cell this node is wired from: its own (country, sector),
    /// or `(ROW, sector)` for dummies.
    pub fn wiring_cell(&self) -> CountrySector {
        let country = if self.is_row_dummy {
            Country::row()
        } else {
            self.country.expect("EU firm without country")
        };
        CountrySector::new(country, self.sector)
    }
}

/// Firms indexed by id; `firms[i].id == i` always holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FirmList {
    firms: Vec<Firm>,
}

impl FirmList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a firm, overwriting its id with the next index.
    pub fn push(&mut self, mut firm: Firm) -> u32 {
        let id = self.firms.len() as u32;
        firm.id = id;
        self.firms.push(firm);
        id
    }

    pub fn len(&self) -> usize {
        self.firms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Firm> {
        self.firms.iter()
    }

    pub fn as_slice(&self) -> &[Firm] {
        &self.firms
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Firm] {
        &mut self.firms
    }

    pub fn get(&self, id: u32) -> Option<&Firm> {
        self.firms.get(id as usize)
    }

    pub fn n_dummies(&self) -> usize {
        self.firms.iter().filter(|f| f.is_row_dummy).count()
    }

    /// Sets the origin country of a dummy.
    pub fn set_origin(&mut self, id: u32, origin: Country) {
        let f = &mut self.firms[id as usize];
        debug_assert!(f.is_row_dummy);
        f.country = Some(origin);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(FIRM_HEADER)?;
        for f in &self.firms {
            wr.write_record([
                f.id.to_string(),
                f.country.map(|c| c.to_string()).unwrap_or_default(),
                f.sector.to_string(),
                f.band.map(|b| b.label()).unwrap_or_default(),
                f.employees.map(|e| e.to_string()).unwrap_or_default(),
                fmt_opt(f.turnover),
                f.k_out_target.to_string(),
                f.k_in_target.to_string(),
                f.is_row_dummy.to_string(),
            ])?;
        }
        wr.flush()
    }

    pub fn read_csv(path: &Path) -> Result<Self, IngestError> {
        let mut reader = SchemaReader::open(path, &FIRM_HEADER)?;
        let path = reader.path().to_path_buf();
        let mut list = FirmList::new();
        for row in reader.rows() {
            let row = row?;
            row.expect_len(&path, FIRM_HEADER.len())?;
            let id: u32 = row.num(&path, 0)?;
            if id as usize != list.len() {
                return Err(row.validation_err(&path, format!("id {id} out of sequence")));
            }
            let opt_code = |i: usize| -> Result<Option<String>, IngestError> {
                let f = row.field(i);
                Ok((!f.is_empty()).then(|| f.to_string()))
            };
            let country = match opt_code(1)? {
                Some(_) => Some(row.code::<Country>(&path, 1)?),
                None => None,
            };
            let band = match opt_code(3)? {
                Some(_) => Some(row.code::<SizeBand>(&path, 3)?),
                None => None,
            };
            let is_row_dummy = match row.field(8) {
                "true" => true,
                "false" => false,
                other => return Err(row.parse_err(&path, format!("bad boolean {other:?}"))),
            };
            list.firms.push(Firm {
                id,
                country,
                sector: row.code(&path, 2)?,
                band,
                employees: row.opt_num(&path, 4)?,
                turnover: row.opt_num(&path, 5)?,
                k_out_target: row.num(&path, 6)?,
                k_in_target: row.num(&path, 7)?,
                is_row_dummy,
            });
        }
        Ok(list)
    }
}

impl<'a> IntoIterator for &'a FirmList {
    type Item = &'a Firm;
    type IntoIter = std::slice::Iter<'a, Firm>;

    fn into_iter(self) -> Self::IntoIter {
        self.firms.iter()
    }
}

/// Fitted size distribution per SBS cell.
pub type CellFits = BTreeMap<SbsKey, ParetoParams<f64>>;

fn cell_label(k: &SbsKey) -> String {
    format!("({}, {}, {})", k.country, k.sector, k.band)
}

/// Fits every cell with at least one firm. Cells run in parallel.
pub fn fit_cells(sbs: &SbsTable, grid: &GridSpec<f64>) -> Result<CellFits, SamplerError> {
    let cells: Vec<_> = sbs.cells().filter(|c| c.n_firms > 0).collect();
    cells
        .par_iter()
        .map(|c| {
            let avg = c.avg_employees.ok_or_else(|| SamplerError::MissingAverage {
                cell: cell_label(&c.key()),
            })?;
            let p = fit_pareto_band(avg, &c.band, grid)?;
            // bounded-band Lomax means cannot pass the midpoint
            if let Ok(m) = truncated_pareto_mean(&p, &c.band) {
                if (m - avg).abs() > 0.01 * avg {
                    log::warn!("cell {}: best fit mean {m:.2} misses average {avg}", cell_label(&c.key()));
                }
            }
            Ok((c.key(), p))
        })
        .collect()
}

/// Samples firms for every SBS cell.
///
/// Each cell contributes `round(n_firms × scale_factor)` firms whose employee
/// counts are drawn from the fitted distribution truncated to the band,
/// rounded and clamped to the band's integer range. Turnover is employees ×
/// turnover per employee (zero when the latter is unknown). Cell `i` in
/// canonical order draws from its own substream, so the output does not
/// depend on thread scheduling.
pub fn sample_firms(
    sbs: &SbsTable,
    fits: &CellFits,
    scale_factor: f64,
    seed: u64,
) -> Result<FirmList, SamplerError> {
    if !(scale_factor > 0.0 && scale_factor <= 1.0) {
        return Err(SamplerError::ScaleFactor(scale_factor));
    }
    let cells: Vec<_> = sbs.cells().collect();
    let per_cell: Vec<Result<Vec<Firm>, SamplerError>> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            let n = (c.n_firms as f64 * scale_factor).round() as usize;
            if n == 0 {
                return Ok(Vec::new());
            }
            let params = fits.get(&c.key()).ok_or_else(|| SamplerError::MissingFit {
                cell: cell_label(&c.key()),
            })?;
            let dist = TruncatedLomax::new(*params, &c.band);
            let (lo, hi) = c.band.integer_range();
            let mut rng = substream(seed, Stage::FirmSizes, idx as u64);
            Ok((0..n)
                .map(|_| {
                    let x = dist.sample(&mut rng).round();
                    let employees = (x.clamp(lo as f64, hi as f64)) as u32;
                    let turnover = employees as f64 * c.turnover_per_employee.unwrap_or(0.0);
                    Firm {
                        id: 0,
                        country: Some(c.country),
                        sector: c.sector,
                        band: Some(c.band),
                        employees: Some(employees),
                        turnover: Some(turnover),
                        k_out_target: 0,
                        k_in_target: 0,
                        is_row_dummy: false,
                    }
                })
                .collect())
        })
        .collect();
    let mut list = FirmList::new();
    for cell in per_cell {
        for f in cell? {
            if list.len() >= u32::MAX as usize {
                return Err(SamplerError::TooManyFirms(list.len()));
            }
            list.push(f);
        }
    }
    Ok(list)
}
