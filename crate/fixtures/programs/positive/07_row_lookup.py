def solution(table_data):
    names = get_column_by_name(table_data, "Name")
    i = get_row_index_by_value(names, "Kato")
    goals = get_column_by_name(table_data, "Goals")
    g = get_column_cell_value(goals, i)
    more = greater_than(g, 10)
    return more
