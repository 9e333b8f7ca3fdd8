def solution(table_data):
    xs = get_column_by_name(table_data, "year")
    ys = get_column_by_name(table_data, "sales")
    fit = linear_regression(xs, ys)
    return fit
