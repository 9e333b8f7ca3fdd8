import math

def add(a, b):
    return a + b

def solution(table_data):
    # prices of the two items
    prices = get_column_by_name(table_data, "Price")
    pen = get_column_cell_value(prices, 0)
    book = get_column_cell_value(prices, 1)
    total = add(pen, book)
    print(total)
    return total

print(solution(table_data))
