def solution(table_data):
    a = count(table_data)
    b = a * 2
    return b
