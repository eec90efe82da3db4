import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn


class GameName(fn.DataEnum):
    BILINEAR = "bilinear"
    QUADRATIC_STRONG = "quadratic-strong"
    SHIFTED_SUM = "shifted-sum"
    KINKED = "kinked"

    def __str__(self):
        return str(self.value)


class GradientMethod(fn.DataEnum):
    SCORE_MC = "score_mc"
    MIXED_MAPPING_MC = "mixed_mapping_mc"
    FINITE_DIFFERENCE = "finite_difference"
    ANALYTIC = "analytic"

    def __str__(self):
        return str(self.value)


class TikhonovMethod(fn.DataEnum):
    EXTRAGRADIENT = "extragradient"
    PROJECTION = "projection"

    def __str__(self):
        return str(self.value)


class SolveMode(fn.DataEnum):
    VI = "vi"
    TIKHONOV = "tikhonov"
    PATH = "path"

    def __str__(self):
        return str(self.value)


class OutputFormat(fn.DataEnum):
    CSV = "csv"
    JSON = "json"

    def __str__(self):
        return str(self.value)


exf_types.add_type("monotone_nash.GameName", GameName)
exf_types.add_type("monotone_nash.GradientMethod", GradientMethod)
exf_types.add_type("monotone_nash.TikhonovMethod", TikhonovMethod)
exf_types.add_type("monotone_nash.SolveMode", SolveMode)
exf_types.add_type("monotone_nash.OutputFormat", OutputFormat)
