// Reference values of ln Γ and Ψ at 30 digits, rounded to f64: (Re z, Im z, Re f, Im f).

pub const LOG_GAMMA_REF: [(f64, f64, f64, f64); 15] = [
    (0.5, 1.0, -0.652_790_644_204_372_915_27, -0.955_007_724_342_569_109_56),
    (0.5, 0.0, 0.572_364_942_924_700_087_07, 0.0),
    (2.5, -3.0, -1.470_954_610_348_841_691_3, -2.822_615_638_260_799_45),
    (0.7, 4.2, -5.391_789_740_795_964_177_9, 2.146_685_312_052_754_841_4),
    (3.3, 0.1, 0.985_331_427_724_742_884_58, 0.103_502_866_727_121_930_8),
    (1.2, -0.8, -0.446_977_386_490_439_107_8, 0.126_638_056_415_510_305_27),
    (0.5, -12.0, -17.930_617_388_334_086_689, -17.822_353_429_356_208_207),
    (10.5, 7.0, 11.660_791_549_107_511_183, 16.623_027_918_393_729_696),
    (0.5, 35.0, -54.058_932_904_616_708_931, 89.438_372_685_023_945_221),
    (4.9, -4.9, 0.696_555_500_690_906_068_61, -8.032_717_552_268_227_421_6),
    (0.55, 0.02, 0.479_191_133_324_509_455_45, -0.034_702_153_128_471_375_953),
    (1.9, 0.3, -0.069_745_307_116_085_166_283, 0.108_895_173_033_134_785_7),
    (-1.3, 0.4, 0.442_599_109_117_652_764_45, -5.486_831_823_804_090_256_7),
    (-2.5, -1.5, -3.717_513_451_191_791_846_2, 7.713_065_525_834_192_526),
    (0.1, 0.05, 2.139_350_425_865_159_286_8, -0.484_796_616_245_221_719_66),
];

pub const DIGAMMA_REF: [(f64, f64, f64, f64); 15] = [
    (0.5, 1.0, -0.051_761_650_994_412_542_793, 1.564_940_517_815_879_282_6),
    (0.5, 0.0, -1.963_510_026_021_423_479_4, 0.0),
    (2.5, -3.0, 1.281_273_919_066_231_427_1, -0.979_805_315_344_559_637_62),
    (0.7, 4.2, 1.433_847_363_244_888_348_1, 1.522_984_655_238_389_081),
    (3.3, 0.1, 1.035_440_876_247_793_154_6, 0.035_335_855_968_179_599_392),
    (1.2, -0.8, 0.061_301_972_389_277_431_24, -0.815_892_894_933_621_145_53),
    (0.5, -12.0, 2.484_616_944_996_103_551_1, -1.570_796_326_794_896_619_2),
    (10.5, 7.0, 2.502_069_119_854_598_178_1, 0.610_463_425_290_483_824_17),
    (0.5, 35.0, 3.555_314_043_022_791_937_2, 1.570_796_326_794_896_619_2),
    (4.9, -4.9, 1.884_784_774_129_244_542_3, -0.838_153_923_785_897_198_51),
    (0.55, 0.02, -1.733_405_745_150_293_614_3, 0.083_927_810_642_112_318_877),
    (1.9, 0.3, 0.376_435_901_977_970_567_86, 0.203_773_717_487_388_191_92),
    (-1.3, 0.4, 1.080_715_597_823_069_517, 2.739_838_546_995_481_606_2),
    (-2.5, -1.5, 1.212_420_100_466_980_755_4, -2.680_346_743_809_672_158_6),
    (0.1, 0.05, -8.421_432_174_968_977_193_2, 4.071_571_119_395_608_171_3),
];
