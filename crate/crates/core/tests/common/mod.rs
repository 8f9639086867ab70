//! Published call prices on the S&P 500 example, one row per moneyness
//! k = S/K. Columns per maturity (0.25, 0.5, 0.75, 1.0): Black-Scholes,
//! generalized GTS, extended GTS.

#![allow(dead_code)]

pub const SPOT: f64 = 4437.86;
pub const MATURITIES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// (strike, k, [[bsm, generalized, extended]; 4])
pub const ROWS: [(f64, f64, [[f64; 3]; 4]); 23] = [
    (2689.61, 1.65, [[1788.29, 1788.3, 1788.29], [1827.76, 1827.78, 1827.78], [1866.8, 1866.91, 1866.9], [1905.61, 1905.83, 1905.83]]),
    (2773.66, 1.6, [[1705.49, 1705.5, 1705.49], [1746.22, 1746.26, 1746.25], [1786.62, 1786.78, 1786.77], [1826.92, 1827.23, 1827.22]]),
    (2863.14, 1.55, [[1617.35, 1617.36, 1617.35], [1659.44, 1659.52, 1659.51], [1701.4, 1701.63, 1701.63], [1743.41, 1743.83, 1743.83]]),
    (2958.57, 1.5, [[1523.34, 1523.35, 1523.34], [1566.95, 1567.08, 1567.08], [1610.73, 1611.07, 1611.07], [1654.74, 1655.31, 1655.31]]),
    (3060.59, 1.45, [[1422.84, 1422.87, 1422.86], [1468.23, 1468.44, 1468.44], [1514.2, 1514.7, 1514.7], [1560.59, 1561.35, 1561.35]]),
    (3169.9, 1.4, [[1315.19, 1315.24, 1315.24], [1362.75, 1363.11, 1363.11], [1411.46, 1412.17, 1412.17], [1460.7, 1461.7, 1461.7]]),
    (3287.3, 1.35, [[1199.63, 1199.76, 1199.75], [1250.06, 1250.64, 1250.64], [1302.26, 1303.25, 1303.24], [1354.91, 1356.2, 1356.2]]),
    (3413.74, 1.3, [[1075.41, 1075.69, 1075.69], [1129.91, 1130.79, 1130.79], [1186.56, 1187.87, 1187.87], [1243.25, 1244.87, 1244.87]]),
    (3550.29, 1.25, [[941.96, 942.52, 942.52], [1002.39, 1003.67, 1003.66], [1064.63, 1066.33, 1066.32], [1126.01, 1127.99, 1127.99]]),
    (3698.22, 1.2, [[799.32, 800.34, 800.34], [868.33, 870.04, 870.03], [937.3, 939.38, 939.38], [1003.88, 1006.21, 1006.21]]),
    (3859.01, 1.15, [[649.08, 650.65, 650.65], [729.59, 731.69, 731.69], [806.08, 808.5, 808.49], [878.05, 880.69, 880.69]]),
    (4034.42, 1.1, [[495.72, 497.69, 497.69], [589.51, 591.85, 591.85], [673.41, 676.02, 676.02], [750.36, 753.2, 753.2]]),
    (4226.53, 1.05, [[347.77, 349.64, 349.63], [453.12, 455.39, 455.39], [542.7, 545.31, 545.31], [623.36, 626.25, 626.25]]),
    (4437.86, 1.0, [[217.36, 218.45, 218.45], [326.85, 328.69, 328.69], [418.34, 420.69, 420.68], [500.33, 503.05, 503.05]]),
    (4671.43, 0.95, [[116.48, 116.53, 116.53], [217.59, 218.71, 218.71], [305.24, 307.06, 307.06], [385.05, 387.4, 387.4]]),
    (4930.96, 0.9, [[51.1, 50.51, 50.51], [130.98, 131.32, 131.32], [208.12, 209.26, 209.26], [281.52, 283.31, 283.31]]),
    (5221.01, 0.85, [[17.38, 16.8, 16.8], [69.54, 69.31, 69.31], [130.53, 131.0, 130.99], [193.32, 194.46, 194.46]]),
    (5547.33, 0.8, [[4.29, 4.02, 4.02], [31.6, 31.15, 31.15], [73.87, 73.82, 73.82], [122.96, 123.47, 123.47]]),
    (5917.15, 0.75, [[0.71, 0.65, 0.65], [11.84, 11.47, 11.47], [36.83, 36.53, 36.53], [71.17, 71.22, 71.22]]),
    (6339.8, 0.7, [[0.07, 0.06, 0.06], [3.49, 3.3, 3.3], [15.7, 15.39, 15.39], [36.69, 36.49, 36.49]]),
    (6827.48, 0.65, [[0.0, 0.0, 0.0], [0.77, 0.7, 0.7], [5.51, 5.31, 5.31], [16.38, 16.13, 16.13]]),
    (7396.43, 0.6, [[0.0, 0.0, 0.0], [0.12, 0.1, 0.1], [1.52, 1.43, 1.43], [6.11, 5.93, 5.93]]),
    (8068.84, 0.55, [[0.0, 0.0, 0.0], [0.01, 0.01, 0.01], [0.31, 0.28, 0.28], [1.82, 1.73, 1.73]]),
];
