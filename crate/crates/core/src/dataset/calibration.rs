//! Published yearly moments of the top-1 share and of the summed top-2..10
//! shares for each board/ownership cell of the Chinese A-share market,
//! together with the published share of firms whose top holder has full
//! control. Used as calibration targets for the synthetic registries.

use super::{Board, GroupKey, Ownership};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub year: i32,
    pub top1_mean: f64,
    pub top1_sd: f64,
    pub top2_10_mean: f64,
    pub top2_10_sd: f64,
    /// Firms in the sample that year.
    pub n_sample: usize,
    /// Published fraction of firms whose top holder has SPI = 1.
    pub full_control_ratio: Option<f64>,
}

const fn row(
    year: i32,
    top1_mean: f64,
    top1_sd: f64,
    top2_10_mean: f64,
    top2_10_sd: f64,
    n_sample: usize,
    full_control_ratio: Option<f64>,
) -> CalibrationRow {
    CalibrationRow {
        year,
        top1_mean,
        top1_sd,
        top2_10_mean,
        top2_10_sd,
        n_sample,
        full_control_ratio,
    }
}

/// Private-owned firms on the main board.
pub const MAIN_PRIVATE: &[CalibrationRow] = &[
    row(1993, 0.294, 0.141, 0.263, 0.148, 28, Some(0.500)),
    row(1994, 0.300, 0.118, 0.262, 0.141, 32, Some(0.531)),
    row(1995, 0.302, 0.110, 0.273, 0.130, 40, Some(0.575)),
    row(1996, 0.316, 0.114, 0.250, 0.130, 87, Some(0.644)),
    row(1997, 0.306, 0.110, 0.257, 0.126, 114, Some(0.561)),
    row(1998, 0.298, 0.105, 0.275, 0.122, 124, Some(0.508)),
    row(1999, 0.303, 0.105, 0.275, 0.122, 146, Some(0.493)),
    row(2000, 0.297, 0.105, 0.276, 0.118, 166, Some(0.500)),
    row(2001, 0.292, 0.105, 0.271, 0.114, 184, Some(0.489)),
    row(2002, 0.287, 0.100, 0.280, 0.118, 226, Some(0.482)),
    row(2003, 0.282, 0.089, 0.284, 0.118, 294, Some(0.442)),
    row(2004, 0.284, 0.089, 0.286, 0.118, 334, Some(0.470)),
    row(2005, 0.282, 0.084, 0.278, 0.118, 337, Some(0.463)),
    row(2006, 0.273, 0.089, 0.246, 0.118, 389, Some(0.491)),
    row(2007, 0.268, 0.100, 0.221, 0.118, 404, Some(0.569)),
    row(2008, 0.265, 0.105, 0.207, 0.118, 395, Some(0.610)),
    row(2009, 0.259, 0.105, 0.184, 0.110, 402, Some(0.664)),
    row(2010, 0.254, 0.100, 0.186, 0.114, 412, Some(0.663)),
    row(2011, 0.258, 0.105, 0.192, 0.122, 444, Some(0.662)),
    row(2012, 0.258, 0.105, 0.196, 0.126, 452, Some(0.639)),
    row(2013, 0.259, 0.110, 0.204, 0.126, 465, Some(0.630)),
    row(2014, 0.264, 0.110, 0.214, 0.126, 504, Some(0.601)),
    row(2015, 0.271, 0.110, 0.244, 0.130, 584, Some(0.551)),
    row(2016, 0.276, 0.114, 0.270, 0.130, 660, Some(0.515)),
    row(2017, 0.288, 0.110, 0.299, 0.134, 827, Some(0.475)),
    row(2018, 0.288, 0.110, 0.297, 0.130, 873, Some(0.479)),
    row(2019, 0.285, 0.109, 0.291, 0.127, 897, Some(0.485)),
    row(2020, 0.280, 0.106, 0.297, 0.128, 963, Some(0.454)),
    row(2021, 0.278, 0.106, 0.293, 0.127, 1029, Some(0.466)),
];

/// State-owned firms on the main board.
pub const MAIN_STATE: &[CalibrationRow] = &[
    row(1992, 0.311, 0.084, 0.332, 0.187, 9, Some(0.444)),
    row(1993, 0.288, 0.148, 0.222, 0.141, 70, Some(0.600)),
    row(1994, 0.301, 0.138, 0.210, 0.130, 94, Some(0.628)),
    row(1995, 0.318, 0.114, 0.240, 0.134, 117, Some(0.615)),
    row(1996, 0.328, 0.105, 0.237, 0.130, 232, Some(0.660)),
    row(1997, 0.329, 0.105, 0.224, 0.126, 314, Some(0.678)),
    row(1998, 0.335, 0.100, 0.223, 0.122, 357, Some(0.689)),
    row(1999, 0.332, 0.100, 0.234, 0.126, 391, Some(0.668)),
    row(2000, 0.327, 0.100, 0.232, 0.130, 458, Some(0.664)),
    row(2001, 0.327, 0.100, 0.227, 0.130, 502, Some(0.669)),
    row(2002, 0.329, 0.100, 0.232, 0.130, 514, Some(0.673)),
    row(2003, 0.333, 0.100, 0.234, 0.130, 508, Some(0.675)),
    row(2004, 0.334, 0.095, 0.243, 0.130, 525, Some(0.651)),
    row(2005, 0.328, 0.095, 0.241, 0.130, 540, Some(0.650)),
    row(2006, 0.318, 0.105, 0.205, 0.126, 644, Some(0.696)),
    row(2007, 0.316, 0.110, 0.193, 0.126, 661, Some(0.725)),
    row(2008, 0.314, 0.110, 0.185, 0.126, 658, Some(0.749)),
    row(2009, 0.313, 0.105, 0.186, 0.126, 648, Some(0.742)),
    row(2010, 0.316, 0.110, 0.184, 0.130, 661, Some(0.755)),
    row(2011, 0.315, 0.105, 0.184, 0.130, 651, Some(0.750)),
    row(2012, 0.317, 0.105, 0.185, 0.134, 638, Some(0.754)),
    row(2013, 0.317, 0.105, 0.191, 0.134, 625, Some(0.746)),
    row(2014, 0.317, 0.100, 0.191, 0.130, 636, Some(0.748)),
    row(2015, 0.319, 0.100, 0.206, 0.130, 651, Some(0.731)),
    row(2016, 0.317, 0.100, 0.220, 0.130, 667, Some(0.694)),
    row(2017, 0.318, 0.100, 0.225, 0.130, 681, Some(0.695)),
    row(2018, 0.321, 0.100, 0.230, 0.134, 675, Some(0.673)),
    row(2019, 0.320, 0.099, 0.235, 0.136, 683, Some(0.669)),
    row(2020, 0.319, 0.101, 0.234, 0.132, 703, Some(0.673)),
    row(2021, 0.321, 0.102, 0.229, 0.129, 730, Some(0.682)),
];

/// Private-owned firms on the SME and GEM boards.
pub const SME_GEM_PRIVATE: &[CalibrationRow] = &[
    row(2004, 0.318, 0.109, 0.379, 0.109, 28, Some(0.429)),
    row(2005, 0.294, 0.093, 0.309, 0.104, 37, Some(0.459)),
    row(2006, 0.307, 0.093, 0.350, 0.109, 68, Some(0.426)),
    row(2007, 0.316, 0.095, 0.359, 0.106, 127, Some(0.409)),
    row(2008, 0.326, 0.102, 0.347, 0.106, 172, Some(0.465)),
    row(2009, 0.320, 0.102, 0.335, 0.105, 238, Some(0.483)),
    row(2010, 0.314, 0.103, 0.354, 0.110, 475, Some(0.442)),
    row(2011, 0.313, 0.102, 0.350, 0.107, 670, Some(0.439)),
    row(2012, 0.311, 0.101, 0.333, 0.112, 775, Some(0.457)),
    row(2013, 0.305, 0.102, 0.304, 0.112, 785, Some(0.506)),
    row(2014, 0.301, 0.104, 0.289, 0.118, 881, Some(0.540)),
    row(2015, 0.292, 0.104, 0.293, 0.119, 1016, Some(0.502)),
    row(2016, 0.283, 0.104, 0.296, 0.116, 1138, Some(0.468)),
    row(2017, 0.283, 0.103, 0.309, 0.119, 1347, Some(0.446)),
    row(2018, 0.278, 0.102, 0.302, 0.115, 1363, Some(0.450)),
    row(2019, 0.271, 0.103, 0.291, 0.115, 1404, Some(0.464)),
    row(2020, 0.266, 0.104, 0.278, 0.115, 1484, Some(0.468)),
    row(2021, 0.262, 0.105, 0.272, 0.116, 1605, Some(0.466)),
];

/// State-owned firms on the SME and GEM boards.
pub const SME_GEM_STATE: &[CalibrationRow] = &[
    row(2004, 0.290, 0.048, 0.451, 0.051, 5, Some(0.000)),
    row(2005, 0.302, 0.101, 0.283, 0.155, 10, Some(0.400)),
    row(2006, 0.343, 0.107, 0.299, 0.119, 22, Some(0.500)),
    row(2007, 0.341, 0.109, 0.295, 0.123, 39, Some(0.590)),
    row(2008, 0.335, 0.104, 0.287, 0.124, 44, Some(0.568)),
    row(2009, 0.343, 0.100, 0.274, 0.124, 53, Some(0.623)),
    row(2010, 0.325, 0.101, 0.309, 0.144, 73, Some(0.507)),
    row(2011, 0.323, 0.096, 0.290, 0.129, 85, Some(0.565)),
    row(2012, 0.326, 0.099, 0.275, 0.127, 94, Some(0.585)),
    row(2013, 0.320, 0.096, 0.267, 0.128, 96, Some(0.594)),
    row(2014, 0.322, 0.099, 0.246, 0.121, 98, Some(0.653)),
    row(2015, 0.310, 0.099, 0.245, 0.115, 106, Some(0.642)),
    row(2016, 0.306, 0.102, 0.255, 0.113, 118, Some(0.593)),
    row(2017, 0.303, 0.097, 0.268, 0.117, 126, Some(0.548)),
    row(2018, 0.296, 0.101, 0.268, 0.114, 143, Some(0.517)),
    row(2019, 0.282, 0.097, 0.272, 0.111, 185, Some(0.465)),
    row(2020, 0.278, 0.095, 0.263, 0.104, 227, Some(0.502)),
    row(2021, 0.278, 0.094, 0.254, 0.112, 269, Some(0.539)),
];

/// Calibration rows for one group.
pub fn table(key: GroupKey) -> &'static [CalibrationRow] {
    match (key.board, key.ownership) {
        (Board::Main, Ownership::Private) => MAIN_PRIVATE,
        (Board::Main, Ownership::State) => MAIN_STATE,
        (Board::SmeGem, Ownership::Private) => SME_GEM_PRIVATE,
        (Board::SmeGem, Ownership::State) => SME_GEM_STATE,
    }
}

/// Calibration row for one group-year, if published.
pub fn lookup(key: GroupKey, year: i32) -> Option<&'static CalibrationRow> {
    table(key).iter().find(|r| r.year == year)
}
